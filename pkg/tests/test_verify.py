import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from backend.app.construct import random_regular_table, random_table, seed_extension, cyclic_quasigroup
from backend.app.errors import InfeasibleEpsilonError, NotHomomorphicError, NotRegularError, TrivialDomainError
from backend.app.hash_family import affine, constant_family, dual_affine, field_multiply, toeplitz, transversal
from backend.app.verify import (
    HashClass,
    classify,
    eq7_nonempty,
    min_epsilon,
    optimal_epsilon,
    regularity_check,
    seed_lower_bounds,
    table1_row,
)
from tests.oracles import naive_acfu, naive_asu, naive_au, naive_balanced

BUILT_INS = [
    lambda: affine(2, 2),
    lambda: affine(3, 2),
    lambda: dual_affine(2, 2),
    lambda: transversal(3),
    lambda: transversal(2, include_infinity=True),
    lambda: toeplitz(2, 1, 2),
    lambda: field_multiply(2, 3, 1, exclude_zero=True),
]


def test_regularity():
    result = regularity_check(affine(2, 2))
    assert result.regular
    assert result.block_size == 3
    assert not regularity_check(constant_family(3, 4, 2)).regular
    irregular = regularity_check(toeplitz(2, 1, 2))
    assert not irregular.regular
    assert irregular.counts[0].tolist() == [4, 0]


def test_affine_epsilons():
    f = affine(2, 2)
    acfu = min_epsilon(f, HashClass.ACFU)
    assert acfu.eps == Fraction(1, 3)
    assert acfu.witness_index == (0, 1, 0)
    assert acfu.witness == ("(0,0)", "(0,1)", "0")
    assert min_epsilon(f, "AU").eps == Fraction(1, 3)
    assert min_epsilon(f, HashClass.ASU).eps == Fraction(2, 3)
    assert min_epsilon(f, HashClass.BALANCED).eps == Fraction(2, 3)


def test_spec_constants():
    assert min_epsilon(field_multiply(2, 3, 1, exclude_zero=True), HashClass.AU).eps == Fraction(3, 7)
    assert min_epsilon(dual_affine(2, 2), HashClass.ACFU).eps == Fraction(1, 2)
    assert min_epsilon(transversal(3), HashClass.ACFU).eps == Fraction(1, 3)
    assert min_epsilon(dual_affine(3, 2), HashClass.ACFU).eps == Fraction(1, 3)
    ext = seed_extension(field_multiply(2, 3, 1, exclude_zero=True), cyclic_quasigroup(2))
    assert min_epsilon(ext, HashClass.ACFU).eps == Fraction(3, 7)
    assert min_epsilon(ext, HashClass.ASU).eps == Fraction(4, 7)


def test_irregular_and_nonlinear_families():
    with pytest.raises(NotRegularError):
        min_epsilon(constant_family(3, 4, 2), HashClass.ACFU)
    with pytest.raises(NotRegularError):
        min_epsilon(toeplitz(2, 1, 2), HashClass.ASU)
    with pytest.raises(NotHomomorphicError):
        min_epsilon(constant_family(4, 2, 2, value=1), HashClass.BALANCED)
    # the difference form alone does not need linearity
    assert min_epsilon(constant_family(4, 2, 2, value=1), HashClass.BALANCED, check_linear=False).eps == 1


def test_single_point_has_no_pairs():
    result = min_epsilon(constant_family(1, 3, 3), HashClass.AU)
    assert result.eps == 0
    assert result.witness is None


@pytest.mark.parametrize("make", BUILT_INS)
def test_built_ins_match_oracle(make):
    f = make()
    assert min_epsilon(f, HashClass.AU).eps == naive_au(f)
    if regularity_check(f).regular:
        assert min_epsilon(f, HashClass.ACFU).eps == naive_acfu(f)
        assert min_epsilon(f, HashClass.ASU).eps == naive_asu(f)


@pytest.mark.parametrize("make", BUILT_INS)
def test_class_ordering_on_built_ins(make):
    f = make()
    report = classify(f)
    x, _, a = f.sizes
    if x > a >= 2:
        assert report.eps_au >= optimal_epsilon(x, a)
    if report.regular:
        assert report.eps_au <= report.eps_acfu <= report.eps_asu
        assert report.eps_asu >= Fraction(1, a)


@pytest.mark.property_based
@given(st.integers(0, 2 ** 32))
@settings(max_examples=60, deadline=None)
def test_class_ordering_on_random_tables(seed):
    f = random_regular_table(5, 6, 3, random.Random(seed))
    au = min_epsilon(f, HashClass.AU).eps
    acfu = min_epsilon(f, HashClass.ACFU).eps
    asu = min_epsilon(f, HashClass.ASU).eps
    assert au <= acfu <= asu
    assert (au, acfu, asu) == (naive_au(f), naive_acfu(f), naive_asu(f))


@pytest.mark.property_based
@given(st.integers(0, 2 ** 32), st.integers(2, 12), st.integers(1, 12), st.integers(1, 4))
@settings(max_examples=60, deadline=None)
def test_random_tables_match_oracle(seed, x, s, a):
    f = random_table(x, s, a, random.Random(seed))
    assert min_epsilon(f, HashClass.AU).eps == naive_au(f)
    assert min_epsilon(f, HashClass.BALANCED, check_linear=False).eps == naive_balanced(f)


def test_parallel_counting_matches_serial(rng):
    f = random_regular_table(12, 8, 4, rng)
    for cls in (HashClass.AU, HashClass.ACFU, HashClass.ASU):
        serial = min_epsilon(f, cls, jobs=1)
        parallel = min_epsilon(f, cls, jobs=3)
        assert (serial.eps, serial.witness_index) == (parallel.eps, parallel.witness_index)


def test_optimal_epsilon():
    assert optimal_epsilon(4, 2) == Fraction(1, 3)
    assert optimal_epsilon(9, 3) == Fraction(1, 4)
    assert optimal_epsilon(8, 2) == Fraction(3, 7)
    with pytest.raises(TrivialDomainError):
        optimal_epsilon(3, 3)
    with pytest.raises(TrivialDomainError):
        optimal_epsilon(5, 1)


def test_seed_bounds_examples():
    r = seed_lower_bounds(6, 2, Fraction(1, 2))
    assert (r.lb_variance, r.lb_simple) == (4, 4)
    assert r.variance_applies

    r = seed_lower_bounds(9, 3, Fraction(1, 4))
    assert (r.lb_ocfu, r.lb_simple, r.lb_variance) == (12, 12, 9)
    assert not r.variance_applies
    assert not r.variance_interval_nonempty
    assert seed_lower_bounds(9, 3, Fraction(1, 3)).lb_ocfu is None


def test_seed_bounds_reject_infeasible_epsilon():
    with pytest.raises(InfeasibleEpsilonError):
        seed_lower_bounds(4, 2, Fraction(1, 4))
    with pytest.raises(InfeasibleEpsilonError):
        seed_lower_bounds(4, 2, Fraction(3, 2))


def test_seed_bounds_at_eps_one():
    for x, a in [(4, 2), (9, 3), (20, 4)]:
        r = seed_lower_bounds(x, a, Fraction(1))
        assert r.lb_simple == a
        assert r.lb_variance <= r.lb_simple


def test_equality_flags():
    r = seed_lower_bounds(4, 2, Fraction(1, 3), s_size=6)
    assert r.equality["lb_ocfu"]
    assert r.equality["lb_simple"]
    assert not r.equality["lb_variance"]
    assert r.to_dict()["lb_ocfu"] == "6/1"


@pytest.mark.parametrize("a", [2, 3, 4, 5])
def test_bounds_at_optimal_epsilon(a):
    for x in range(a + 1, 65):
        r = seed_lower_bounds(x, a, optimal_epsilon(x, a))
        assert r.lb_au == Fraction(x - 1, a - 1)
        assert r.lb_ocfu == Fraction(a * (x - 1), a - 1)
        assert r.lb_variance == x


@pytest.mark.parametrize("a", [2, 3, 4, 5])
def test_bounds_at_one_over_a(a):
    for x in range(a + 1, 65):
        r = seed_lower_bounds(x, a, Fraction(1, a))
        assert r.lb_au == Fraction(x, a)
        assert r.acfu_bound == max(Fraction(a * a), 1 + Fraction(x * (a - 1), a))
        assert r.lb_asu_variance == 1 + x * (a - 1)
        assert r.lb_asu_simple == a * a


@pytest.mark.parametrize("a", [2, 3, 4])
def test_au_simple_bound_never_exceeds_variance_form(a):
    for x in range(a * a, 80):
        opt = optimal_epsilon(x, a)
        for k in range(0, 6):
            eps = opt + (1 - opt) * Fraction(k, 5)
            r = seed_lower_bounds(x, a, eps)
            assert r.lb_au_simple <= r.lb_au
            if x == a * a:
                assert r.lb_au_simple == r.lb_au


def test_au_simple_bound_wins_below_a_squared():
    r = seed_lower_bounds(3, 2, Fraction(1, 2))
    assert r.lb_au == Fraction(3, 2)
    assert r.lb_au_simple == 2
    assert seed_lower_bounds(3, 2, Fraction(1)).lb_au == 1


def test_eq7_threshold():
    # smallest |X| with a nonempty variance interval for |A| = 2 is 6
    assert not eq7_nonempty(5, 2)
    assert eq7_nonempty(6, 2)
    assert not eq7_nonempty(9, 3)


def test_asu_crossover_flag():
    r = seed_lower_bounds(8, 2, Fraction(6, 7))
    assert r.asu_simple_dominates
    assert not seed_lower_bounds(8, 2, Fraction(1, 2)).asu_simple_dominates
    assert seed_lower_bounds(8, 2, Fraction(3, 7)).lb_asu_simple is None


def test_table1_row():
    row = table1_row(9, 3)
    assert row["optimal_eps"] == "1/4"
    assert row["strongest"] in ("lb_simple", "lb_ocfu")
    assert table1_row(4, 2)["lb_ocfu"] == "6/1"


def test_classify_reports():
    report = classify(affine(2, 2))
    assert report.ocfu and report.ou
    assert report.bounds.equality["lb_ocfu"]

    report = classify(dual_affine(2, 2))
    assert report.eps_acfu == Fraction(1, 2)
    assert report.bounds.lb_variance == 4
    assert report.bounds.equality["lb_variance"]

    report = classify(transversal(3))
    assert report.eps_acfu == Fraction(1, 3)
    assert report.bounds.equality["lb_simple"]

    report = classify(dual_affine(3, 2))
    assert report.bounds.lb_variance == 9


def test_field_multiply_over_gf3_is_neither_ou_nor_ocfu():
    report = classify(field_multiply(3, 2, 1))
    assert report.eps_au == Fraction(1, 3) > optimal_epsilon(9, 3)
    assert not report.regular
    assert report.absent[HashClass.ACFU] == "NotRegular"
    assert not report.ou and not report.ocfu


def test_classify_marks_absent_classes():
    data = classify(constant_family(3, 4, 2)).to_dict()
    assert data["eps_acfu"] == "NotRegular"
    assert data["eps_asu"] == "NotRegular"
    assert data["eps_au"] == "1/1"
    assert data["eps_balanced"] == "1/1"
    data = classify(field_multiply(2, 3, 1, exclude_zero=True)).to_dict()
    assert data["ou"] is True
    assert data["bounds"] is None
