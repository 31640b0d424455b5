"""
Building new hash families from old ones: seed and point extension by a
quasigroup, concatenation, the Krawczyk lift of a balanced homomorphic
family and the double extension of a balanced function.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import (
    CarrierMismatchError,
    DomainMismatchError,
    NotBalancedError,
    NotLatinSquareError,
    TheoremViolationError,
    UnsupportedParametersError,
)
from .finite_field import gf, prime_power, vectors
from .hash_family import GroupStructure, HashFamily, from_table, index_table
from .verify import HashClass, check_homomorphism, min_epsilon, regularity_check

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Quasigroup:
    """Latin square on symbols 0..n-1; table[a, b] is the product a o b."""

    table: np.ndarray
    labels: Optional[tuple[str, ...]] = None

    @property
    def order(self) -> int:
        return len(self.table)

    @property
    def division(self) -> np.ndarray:
        """division[a, b] is the unique c with c o b = a."""
        cached = self.__dict__.get("_division")
        if cached is None:
            n = self.order
            cached = np.empty((n, n), dtype=np.int64)
            for c in range(n):
                for b in range(n):
                    cached[self.table[c, b], b] = c
            self.__dict__["_division"] = cached
        return cached

    def product(self, a: int, b: int) -> int:
        return int(self.table[a, b])


def _validate_latin(table: np.ndarray) -> None:
    n = len(table)
    if table.shape != (n, n) or n == 0:
        raise NotLatinSquareError(f"a latin square must be square, got shape {table.shape}")
    want = np.arange(n)
    for i in range(n):
        if not np.array_equal(np.sort(table[i]), want):
            raise NotLatinSquareError(f"row {i} is not a permutation of the {n} symbols")
        if not np.array_equal(np.sort(table[:, i]), want):
            raise NotLatinSquareError(f"column {i} is not a permutation of the {n} symbols")


def latin_quasigroup(rows: Sequence[Sequence[int | str]], labels: Optional[Sequence[str]] = None) -> Quasigroup:
    """Quasigroup from an explicit table of symbol indices, or of labels when labels are given."""
    if labels is not None:
        position = {a: i for i, a in enumerate(labels)}
        try:
            rows = [[position[a] for a in row] for row in rows]
        except KeyError as exc:
            raise NotLatinSquareError(f"unknown symbol {exc.args[0]!r}") from None
    table = np.asarray(rows, dtype=np.int64)
    _validate_latin(table)
    return Quasigroup(table, tuple(labels) if labels is not None else None)


def group_quasigroup(group: GroupStructure) -> Quasigroup:
    return Quasigroup(np.asarray(group.add, dtype=np.int64))


def cyclic_quasigroup(n: int) -> Quasigroup:
    if n < 1:
        raise UnsupportedParametersError(f"cyclic quasigroup needs n >= 1, got {n}")
    return group_quasigroup(GroupStructure.cyclic(n))


def elementary_quasigroup(p: int, m: int = 1) -> Quasigroup:
    if prime_power(p) != (p, 1):
        raise UnsupportedParametersError(f"elementary abelian group needs a prime, got {p}")
    return group_quasigroup(GroupStructure.from_elements(tuple(vectors(gf(p), m))))


def quasigroup_build(source: str, *args, **kwargs) -> Quasigroup:
    builders = {"cyclic": cyclic_quasigroup, "elementary": elementary_quasigroup, "table": latin_quasigroup}
    try:
        return builders[source](*args, **kwargs)
    except KeyError:
        raise UnsupportedParametersError(f"unknown quasigroup source {source!r}") from None


def random_latin_square(n: int, rng: random.Random) -> Quasigroup:
    """A random isotope of the cyclic square: rows, columns and symbols permuted."""
    rows, cols, symbols = list(range(n)), list(range(n)), list(range(n))
    rng.shuffle(rows)
    rng.shuffle(cols)
    rng.shuffle(symbols)
    table = [[symbols[(rows[i] + cols[j]) % n] for j in range(n)] for i in range(n)]
    return latin_quasigroup(table)


def random_table(x_size: int, s_size: int, a_size: int, rng: random.Random, name: str = "random") -> HashFamily:
    rows = [[rng.randrange(a_size) for _ in range(s_size)] for _ in range(x_size)]
    return from_table(
        [f"x{i}" for i in range(x_size)],
        [f"s{j}" for j in range(s_size)],
        [str(a) for a in range(a_size)],
        rows,
        name=name,
    )


def random_regular_table(x_size: int, s_size: int, a_size: int, rng: random.Random, name: str = "random-regular") -> HashFamily:
    """Every row hits each value exactly s_size / a_size times."""
    if s_size % a_size:
        raise UnsupportedParametersError(f"|A|={a_size} does not divide |S|={s_size}")
    rows = []
    for _ in range(x_size):
        row = [a for a in range(a_size) for _ in range(s_size // a_size)]
        rng.shuffle(row)
        rows.append(row)
    return from_table(
        [f"x{i}" for i in range(x_size)],
        [f"s{j}" for j in range(s_size)],
        [str(a) for a in range(a_size)],
        rows,
        name=name,
    )


def _check_carrier(g: HashFamily, Q: Quasigroup) -> None:
    if Q.order != len(g.a_domain):
        raise CarrierMismatchError(f"quasigroup of order {Q.order} on a value set of size {len(g.a_domain)}")
    if Q.labels is not None and tuple(Q.labels) != g.a_labels:
        raise CarrierMismatchError(f"quasigroup symbols {list(Q.labels)} differ from values {list(g.a_labels)}")


def seed_extension(g: HashFamily, Q: Quasigroup) -> HashFamily:
    """g^(x; h, b) = g(x, h) o b, seeds ordered (h, b) lexicographically."""
    _check_carrier(g, Q)
    table = index_table(g)
    n_x, n_h, n_a = g.sizes
    ext = Q.table[table[:, :, None], np.arange(n_a)[None, None, :]].reshape(n_x, n_h * n_a)
    return HashFamily(
        name=f"seed_ext({g.name})",
        x_domain=g.x_domain,
        s_domain=tuple((h, b) for h in g.s_domain for b in g.a_domain),
        a_domain=g.a_domain,
        table=ext,
        params={"kind": "seed_extension", "base": g.params or g.name},
        x_group=g.x_group,
        a_group=g.a_group,
    )


def point_extension(g: HashFamily, Q: Quasigroup) -> HashFamily:
    """g'(y, b; s) = g(y, s) o b, points ordered (y, b) lexicographically."""
    _check_carrier(g, Q)
    table = index_table(g)
    n_y, n_s, n_a = g.sizes
    ext = Q.table[table[:, None, :], np.arange(n_a)[None, :, None]].reshape(n_y * n_a, n_s)
    regular = regularity_check(g).regular
    if not regular:
        logger.warning(f"point extension of irregular {g.name}: the result cannot satisfy ACFU1")
    return HashFamily(
        name=f"point_ext({g.name})",
        x_domain=tuple((y, b) for y in g.x_domain for b in g.a_domain),
        s_domain=g.s_domain,
        a_domain=g.a_domain,
        table=ext,
        params={"kind": "point_extension", "base": g.params or g.name, "irregular_source": not regular},
        a_group=g.a_group,
    )


def concatenation_bound(eps1: Fraction, eps2: Fraction, a1_size: int) -> Fraction:
    """ACFU guarantee of f2(f1(x, s1), s2) for eps1-ASU f1 and eps2-ACFU f2."""
    return Fraction(eps1) * Fraction(eps2) * (a1_size - 1) + Fraction(eps1)


def concatenate(f1: HashFamily, f2: HashFamily) -> HashFamily:
    """f(x; s1, s2) = f2(f1(x, s1), s2), matching f1's values to f2's points by label."""
    if sorted(f1.a_labels) != sorted(f2.x_labels):
        raise DomainMismatchError(
            f"values of {f1.name} ({len(f1.a_domain)}) do not match the points of {f2.name} ({len(f2.x_domain)})"
        )
    to_point = np.array([f2.x_labels.index(a) for a in f1.a_labels], dtype=np.int64)
    t1 = to_point[index_table(f1)]
    t2 = index_table(f2)
    n_x, n_s1, _ = f1.sizes
    _, n_s2, _ = f2.sizes
    table = t2[t1[:, :, None], np.arange(n_s2)[None, None, :]].reshape(n_x, n_s1 * n_s2)
    return HashFamily(
        name=f"concat({f1.name},{f2.name})",
        x_domain=f1.x_domain,
        s_domain=tuple((s1, s2) for s1 in f1.s_domain for s2 in f2.s_domain),
        a_domain=f2.a_domain,
        table=table,
        params={"kind": "concatenation", "first": f1.name, "second": f2.name},
        a_group=f2.a_group,
    )


def concatenate_with_bound(f1: HashFamily, f2: HashFamily) -> tuple[HashFamily, Fraction]:
    composite = concatenate(f1, f2)
    eps1 = min_epsilon(f1, HashClass.ASU).eps
    eps2 = min_epsilon(f2, HashClass.ACFU).eps
    bound = concatenation_bound(eps1, eps2, len(f1.a_domain))
    logger.info(f"{composite.name}: guaranteed eps_acfu <= {bound} (eps1={eps1}, eps2={eps2})")
    return composite, bound


def krawczyk_lift(g: HashFamily, eps: Optional[Fraction] = None) -> HashFamily:
    """Seed extension of a balanced homomorphic family by the group on A."""
    check_homomorphism(g)
    measured = min_epsilon(g, HashClass.BALANCED).eps
    if eps is not None and measured > eps:
        raise NotBalancedError(f"{g.name} is only {measured}-balanced, not {eps}-balanced")
    lifted = seed_extension(g, group_quasigroup(g.a_group))
    eps_asu = min_epsilon(lifted, HashClass.ASU).eps
    if eps_asu > measured:
        raise TheoremViolationError(
            f"lift of {measured}-balanced {g.name} has eps_asu={eps_asu}",
            dump={"family": g.name, "eps_balanced": str(measured), "eps_asu": str(eps_asu)},
        )
    lifted.params["eps_balanced"] = str(measured)
    logger.info(f"lifted {g.name}: {measured}-balanced, eps_asu={eps_asu}")
    return lifted


def double_extension_parts(a: HashFamily) -> tuple[HashFamily, HashFamily]:
    """(g1, g2) with g1(y, b; h) = a(y, h) + b and g2(y; h, c) = a(y, h) + c."""
    if a.a_group is None:
        raise NotBalancedError(f"{a.name}: A needs an abelian group structure")
    Q = group_quasigroup(a.a_group)
    return point_extension(a, Q), seed_extension(a, Q)


def double_extension(a: HashFamily, eps: Optional[Fraction] = None) -> HashFamily:
    """
    f(y, b; h, c) = a(y, h) + b + c. Equal to the seed extension of g1 and to
    the point extension of g2 from double_extension_parts.

    A measured balance of 1 is only accepted when eps=1 is passed explicitly.
    """
    if a.a_group is None:
        raise NotBalancedError(f"{a.name}: A needs an abelian group structure")
    measured = min_epsilon(a, HashClass.BALANCED, check_linear=False).eps
    limit = Fraction(eps) if eps is not None else None
    if (limit is not None and measured > limit) or (limit is None and measured >= 1 and len(a.x_domain) > 1):
        raise NotBalancedError(f"{a.name} is {measured}-balanced" + (f", above {limit}" if limit is not None else ""))
    add = np.asarray(a.a_group.add, dtype=np.int64)
    table = index_table(a)
    n_y, n_h, n_a = a.sizes
    alphas = np.arange(n_a)
    # axes (y, b, h, c)
    inner = add[table[:, None, :], alphas[None, :, None]]
    full = add[inner[:, :, :, None], alphas[None, None, None, :]]
    f = HashFamily(
        name=f"double_ext({a.name})",
        x_domain=tuple((y, b) for y in a.x_domain for b in a.a_domain),
        s_domain=tuple((h, c) for h in a.s_domain for c in a.a_domain),
        a_domain=a.a_domain,
        table=full.reshape(n_y * n_a, n_h * n_a),
        params={"kind": "double_extension", "base": a.name, "eps_balanced": str(measured)},
        a_group=a.a_group,
    )
    logger.info(f"double extension of {a.name}: {measured}-balanced, {f}")
    return f


def product_family(q: int) -> HashFamily:
    """a(y, h) = y * h over F_q, the balanced function behind the transversal family."""
    F = gf(q)
    return HashFamily(
        name=f"product(q={q})",
        x_domain=F.elements,
        s_domain=F.elements,
        a_domain=F.elements,
        rule=lambda y, h: y * h,
        params={"kind": "product", "q": q},
        x_group=GroupStructure.from_elements(F.elements),
        a_group=GroupStructure.from_elements(F.elements),
    )

