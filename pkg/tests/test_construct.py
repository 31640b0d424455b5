import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from backend.app.construct import (
    concatenate,
    concatenate_with_bound,
    concatenation_bound,
    cyclic_quasigroup,
    double_extension,
    double_extension_parts,
    elementary_quasigroup,
    krawczyk_lift,
    latin_quasigroup,
    point_extension,
    product_family,
    quasigroup_build,
    random_latin_square,
    random_regular_table,
    random_table,
    seed_extension,
)
from backend.app.designs import is_isomorphic, mosaic_from_function, sum_mosaic
from backend.app.errors import (
    CarrierMismatchError,
    DomainMismatchError,
    NotBalancedError,
    NotHomomorphicError,
    NotLatinSquareError,
    UnsupportedParametersError,
)
from backend.app.finite_field import dot, gf, vectors
from backend.app.hash_family import (
    GroupStructure,
    HashFamily,
    affine,
    constant_family,
    dual,
    dual_affine,
    evaluate,
    field_multiply,
    from_table,
    index_table,
    toeplitz,
    transversal,
)
from backend.app.verify import HashClass, min_epsilon, regularity_check
from backend.config import get_settings

BUILT_INS = [
    lambda: affine(2, 2),
    lambda: affine(3, 2),
    lambda: transversal(3),
    lambda: toeplitz(2, 1, 2),
    lambda: field_multiply(2, 3, 1, exclude_zero=True),
]

REGULAR_BUILT_INS = [
    lambda: affine(2, 2),
    lambda: affine(3, 2),
    lambda: dual_affine(2, 2),
    lambda: transversal(3),
]


def eps(f, cls):
    return min_epsilon(f, cls).eps


def relabel_points(f: HashFamily, labels) -> HashFamily:
    return from_table(labels, f.s_labels, f.a_labels, index_table(f), name=f.name)


def test_cyclic_quasigroups():
    assert cyclic_quasigroup(2).table.tolist() == [[0, 1], [1, 0]]
    Q = cyclic_quasigroup(3)
    assert Q.division.tolist() == [[(a - b) % 3 for b in range(3)] for a in range(3)]


def test_division_inverts_product(rng):
    Q = random_latin_square(5, rng)
    for a in range(5):
        for b in range(5):
            assert Q.product(Q.division[a, b], b) == a


def test_latin_square_validation():
    with pytest.raises(NotLatinSquareError):
        latin_quasigroup([[0, 0], [1, 1]])
    with pytest.raises(NotLatinSquareError):
        latin_quasigroup([[0, 1], [0, 1]])
    with pytest.raises(NotLatinSquareError):
        latin_quasigroup([[0, 1, 2], [1, 2, 0]])
    with pytest.raises(NotLatinSquareError):
        latin_quasigroup([["a", "b"], ["b", "c"]], labels=["a", "b"])
    Q = latin_quasigroup([["b", "a"], ["a", "b"]], labels=["a", "b"])
    assert Q.table.tolist() == [[1, 0], [0, 1]]


def test_quasigroup_build():
    assert quasigroup_build("cyclic", 4).order == 4
    assert quasigroup_build("elementary", 2, 2).order == 4
    with pytest.raises(UnsupportedParametersError):
        quasigroup_build("moufang", 3)
    with pytest.raises(UnsupportedParametersError):
        elementary_quasigroup(4)


def test_carrier_mismatch():
    with pytest.raises(CarrierMismatchError):
        seed_extension(affine(2, 2), cyclic_quasigroup(3))
    labeled = latin_quasigroup([["b", "a"], ["a", "b"]], labels=["a", "b"])
    with pytest.raises(CarrierMismatchError):
        point_extension(affine(2, 2), labeled)


def test_seed_extension_of_field_multiply():
    g = field_multiply(2, 3, 1, exclude_zero=True)
    ext = seed_extension(g, cyclic_quasigroup(2))
    assert ext.sizes == (8, 14, 2)
    assert regularity_check(ext).regular
    assert eps(ext, HashClass.ACFU) == Fraction(3, 7)


def test_hyperplane_form_extends_to_affine():
    F = gf(2)
    xs = tuple(vectors(F, 2))
    normals = tuple(v for v in xs if any(not c.is_zero for c in v) and next(c for c in v if not c.is_zero) == F.one)
    g = HashFamily(
        name="hyperplane",
        x_domain=xs,
        s_domain=normals,
        a_domain=F.elements,
        rule=lambda x, h: dot(h, x),
    )
    ext = seed_extension(g, cyclic_quasigroup(2))
    f = affine(2, 2)
    assert ext.s_labels == f.s_labels
    assert np.array_equal(index_table(ext), index_table(f))


def test_full_collision_transfers_to_acfu_one():
    g = from_table(["x0", "x1"], ["h0", "h1"], ["0", "1"], [[0, 1], [0, 1]])
    assert eps(seed_extension(g, cyclic_quasigroup(2)), HashClass.ACFU) == 1


@pytest.mark.parametrize("make", BUILT_INS)
def test_seed_extension_transfers_au_to_acfu(make):
    g = make()
    Q = cyclic_quasigroup(len(g.a_domain))
    assert eps(seed_extension(g, Q), HashClass.ACFU) == eps(g, HashClass.AU)


@pytest.mark.property_based
@given(st.integers(0, 2 ** 32))
@settings(max_examples=100, deadline=None)
def test_seed_extension_transfer_on_random_tables(seed):
    rng = random.Random(seed)
    g = random_table(5, 4, 3, rng)
    ext = seed_extension(g, random_latin_square(3, rng))
    assert regularity_check(ext).regular
    assert eps(ext, HashClass.ACFU) == eps(g, HashClass.AU)


@pytest.mark.property_based
@given(st.integers(0, 2 ** 32))
@settings(max_examples=100, deadline=None)
def test_point_extension_transfers_asu_to_acfu(seed):
    rng = random.Random(seed)
    g = random_regular_table(4, 6, 3, rng)
    ext = point_extension(g, random_latin_square(3, rng))
    assert eps(ext, HashClass.ACFU) == eps(g, HashClass.ASU)


@pytest.mark.parametrize("make", REGULAR_BUILT_INS)
def test_point_extension_transfers_asu_on_built_ins(make):
    g = make()
    assert regularity_check(g).regular
    ext = point_extension(g, cyclic_quasigroup(len(g.a_domain)))
    assert eps(ext, HashClass.ACFU) == eps(g, HashClass.ASU)


def test_point_extension_of_irregular_function_is_irregular():
    g = toeplitz(2, 1, 2)
    ext = point_extension(g, cyclic_quasigroup(2))
    assert ext.params["irregular_source"]
    assert not regularity_check(ext).regular


@pytest.mark.parametrize("make", BUILT_INS)
def test_point_extension_is_dual_of_seed_extension(make):
    g = make()
    Q = cyclic_quasigroup(len(g.a_domain))
    lhs = index_table(dual(point_extension(g, Q)))
    rhs = index_table(seed_extension(dual(g), Q))
    assert np.array_equal(lhs, rhs)


@pytest.mark.parametrize(
    "make", REGULAR_BUILT_INS + [lambda: field_multiply(2, 3, 1, exclude_zero=True)]
)
def test_seed_extension_members_match_the_sum(make):
    g = make()
    total = sum_mosaic(mosaic_from_function(g))
    for member in mosaic_from_function(seed_extension(g, cyclic_quasigroup(len(g.a_domain)))).members:
        assert is_isomorphic(member, total)


def test_concatenation_bound_formula():
    assert concatenation_bound(Fraction(1, 2), Fraction(1, 3), 2) == Fraction(2, 3)
    assert concatenation_bound(Fraction(1, 4), Fraction(1, 3), 4) == Fraction(1, 2)


def test_concatenate_toeplitz_into_affine():
    f1 = seed_extension(toeplitz(2, 2, 3), elementary_quasigroup(2, 2))
    assert eps(f1, HashClass.ASU) == Fraction(1, 4)
    f, bound = concatenate_with_bound(f1, affine(2, 2))
    assert bound == Fraction(1, 2)
    assert f.sizes == (8, 64 * 6, 2)
    assert eps(f, HashClass.ACFU) <= bound


def test_concatenate_matches_by_label():
    f1 = toeplitz(2, 2, 3)
    f2 = affine(2, 2)
    f = concatenate(f1, f2)
    x = f1.x_domain[5]
    s1, s2 = f1.s_domain[3], f2.s_domain[4]
    assert evaluate(f, x, (s1, s2)) == evaluate(f2, evaluate(f1, x, s1), s2)


def test_concatenate_after_injection_keeps_profile():
    f2 = affine(2, 2)
    identity = from_table(f2.x_labels, ["id"], f2.x_labels, [[i] for i in range(4)])
    f = concatenate(identity, f2)
    assert eps(f, HashClass.ACFU) == eps(f2, HashClass.ACFU)


def test_concatenate_mismatch():
    with pytest.raises(DomainMismatchError):
        concatenate(affine(2, 2), affine(2, 2))


@pytest.mark.parametrize("seed", range(24))
def test_concatenation_bound_holds(seed):
    rng = random.Random(get_settings().rng_seed + seed)
    f1 = random_regular_table(5, 6, 3, rng)
    f2 = relabel_points(random_regular_table(3, 4, 2, rng), f1.a_labels)
    f, bound = concatenate_with_bound(f1, f2)
    assert eps(f, HashClass.ACFU) <= bound


@pytest.mark.parametrize("make", [lambda: toeplitz(2, 1, 2), lambda: field_multiply(2, 3, 1)])
def test_krawczyk_lift(make):
    g = make()
    lifted = krawczyk_lift(g)
    assert lifted.params["eps_balanced"] == "1/2"
    assert eps(lifted, HashClass.ASU) == Fraction(1, 2)


def test_krawczyk_rejects():
    with pytest.raises(NotBalancedError):
        krawczyk_lift(toeplitz(2, 1, 2), Fraction(1, 4))
    with pytest.raises(NotHomomorphicError):
        krawczyk_lift(constant_family(4, 2, 2, value=1))


def test_product_family_is_balanced():
    a = product_family(3)
    assert eps(a, HashClass.BALANCED) == Fraction(1, 3)


def test_double_extension_matches_transversal():
    F = gf(3)
    f = double_extension(product_family(3))
    t = transversal(3)
    assert f.sizes == (9, 9, 3)
    assert eps(f, HashClass.ACFU) == Fraction(1, 3)
    for hT in F.elements:
        for yT in F.elements:
            for s1 in F.elements:
                for s2 in F.elements:
                    assert evaluate(f, (-hT, yT), (s1, s2)) == evaluate(t, (hT, yT), (s1, s2))


def test_double_extension_parts():
    a = product_family(3)
    f = double_extension(a)
    g1, g2 = double_extension_parts(a)
    Q = cyclic_quasigroup(3)
    table = index_table(f)
    assert np.array_equal(index_table(seed_extension(g1, Q)), table)
    assert np.array_equal(index_table(point_extension(g2, Q)), table)


def test_double_extension_of_constant():
    a = from_table(["y0", "y1"], ["h0", "h1"], ["0", "1"], [[0, 0], [0, 0]], a_group=GroupStructure.cyclic(2))
    with pytest.raises(NotBalancedError):
        double_extension(a)
    f = double_extension(a, eps=Fraction(1))
    assert f.params["eps_balanced"] == "1"
