"""
Exhaustive collision counting and the seed-size bounds.

Every epsilon is an exact Fraction: the largest collision count over all
pairs x < x' scaled by the class normalizer. Witnesses are index tuples
in lexicographic order; the smallest attaining one is reported.
"""
from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional

import numpy as np
from tqdm import tqdm

from ..config import get_settings
from .errors import (
    BudgetExceededError,
    InfeasibleEpsilonError,
    NotHomomorphicError,
    NotRegularError,
    TrivialDomainError,
)
from .hash_family import HashFamily, index_table, label
from .models import rational_str

logger = logging.getLogger(__name__)


class HashClass(str, Enum):
    AU = "AU"
    ACFU = "ACFU"
    ASU = "ASU"
    BALANCED = "BALANCED"


@dataclass
class RegularityResult:
    regular: bool
    block_size: Optional[Fraction]
    counts: np.ndarray  # counts[x, a] = |{s : f(x, s) = a}|


@dataclass
class EpsilonResult:
    hash_class: HashClass
    eps: Fraction
    count: int
    witness: Optional[tuple[str, ...]]
    witness_index: Optional[tuple[int, ...]] = None


def regularity_check(f: HashFamily, budget: Optional[int] = None) -> RegularityResult:
    table = index_table(f, budget)
    n_x, n_s, n_a = f.sizes
    counts = _row_counts(table, n_a)
    regular = n_s % n_a == 0 and bool(np.all(counts == n_s // n_a))
    return RegularityResult(regular, Fraction(n_s, n_a) if regular else None, counts)


def _row_counts(codes: np.ndarray, width: int) -> np.ndarray:
    """Per-row histogram of codes in [0, width)."""
    k = codes.shape[0]
    if k == 0:
        return np.zeros((0, width), dtype=np.int64)
    flat = codes + (np.arange(k, dtype=np.int64) * width)[:, None]
    return np.bincount(flat.ravel(), minlength=k * width).reshape(k, width)


def _pair_counts(table: np.ndarray, x: int, hash_class: HashClass, n_a: int, sub: Optional[np.ndarray]) -> np.ndarray:
    """Counts for the pairs (x, x') with x' > x: one row per x', one column per value tuple."""
    row = table[x]
    rest = table[x + 1:]
    if hash_class is HashClass.AU:
        return (rest == row).sum(axis=1, keepdims=True)
    if hash_class is HashClass.ACFU:
        codes = np.where(rest == row, row, n_a)
        return _row_counts(codes, n_a + 1)[:, :n_a]
    if hash_class is HashClass.ASU:
        return _row_counts(row * n_a + rest, n_a * n_a)
    return _row_counts(sub[row[None, :], rest], n_a)


def _witness_tail(hash_class: HashClass, column: int, n_a: int) -> tuple[int, ...]:
    if hash_class is HashClass.AU:
        return ()
    if hash_class is HashClass.ASU:
        return divmod(column, n_a)
    return (column,)


class ParallelCollisionCounter:
    """Max-count reduction over x rows, split into contiguous chunks.

    Ties break on the smallest witness tuple, so the result does not depend
    on the number of workers.
    """

    def __init__(self, jobs: Optional[int] = None):
        self.jobs = jobs or get_settings().jobs

    def _scan(self, table, hash_class, n_a, sub, rows) -> tuple[int, Optional[tuple[int, ...]]]:
        best, witness = -1, None
        for x in rows:
            counts = _pair_counts(table, x, hash_class, n_a, sub)
            if counts.size == 0:
                continue
            flat = int(np.argmax(counts))
            value = int(counts.flat[flat])
            if value > best:
                j, col = divmod(flat, counts.shape[1])
                best = value
                witness = (x, x + 1 + j) + tuple(_witness_tail(hash_class, col, n_a))
        return best, witness

    def max_count(self, table: np.ndarray, hash_class: HashClass, n_a: int, sub: Optional[np.ndarray] = None):
        n_x = table.shape[0]
        progress = get_settings().progress
        if self.jobs <= 1 or n_x < 2 * self.jobs:
            rows = tqdm(range(n_x), desc=f"{hash_class.value} pairs", disable=not progress)
            return self._scan(table, hash_class, n_a, sub, rows)
        bounds = np.linspace(0, n_x, self.jobs + 1, dtype=int)
        chunks = [range(bounds[i], bounds[i + 1]) for i in range(self.jobs)]
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            parts = list(pool.map(lambda rows: self._scan(table, hash_class, n_a, sub, rows), chunks))
        best, witness = -1, None
        for value, w in parts:
            if w is None:
                continue
            if value > best or (value == best and w < witness):
                best, witness = value, w
        return best, witness


def check_homomorphism(f: HashFamily, budget: Optional[int] = None) -> None:
    """Raise NotHomomorphicError unless f(x1 + x2, s) = f(x1, s) + f(x2, s) for every seed."""
    if f.x_group is None or f.a_group is None:
        raise NotHomomorphicError(f"{f.name}: X and A need designated group structures")
    table = index_table(f, budget)
    n_x, n_s, _ = f.sizes
    if f.x_group.order != n_x or f.a_group.order != len(f.a_domain):
        raise NotHomomorphicError(f"{f.name}: group orders do not match the domains")
    if n_x * n_x * n_s > (budget or get_settings().table_budget):
        raise BudgetExceededError(f"{f.name}: homomorphism check over {n_x}^2 x {n_s} entries exceeds budget")
    lhs = table[f.x_group.add]
    rhs = f.a_group.add[table[:, None, :], table[None, :, :]]
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        x1, x2, s = bad[0]
        raise NotHomomorphicError(
            f"{f.name}: f({label(f.x_domain[x1])} + {label(f.x_domain[x2])}, {label(f.s_domain[s])}) "
            f"is not the sum of the images"
        )


def min_epsilon(
    f: HashFamily,
    hash_class: HashClass | str,
    budget: Optional[int] = None,
    jobs: Optional[int] = None,
    check_linear: bool = True,
) -> EpsilonResult:
    """
    Least epsilon of the class with a witness. BALANCED uses the difference
    form and needs group structures on X and A; check_linear=False skips the
    homomorphism precondition (only the group on A is then used).
    """
    hash_class = HashClass(hash_class)
    table = index_table(f, budget)
    n_x, n_s, n_a = f.sizes
    sub = None
    if hash_class in (HashClass.ACFU, HashClass.ASU):
        if not regularity_check(f, budget).regular:
            raise NotRegularError(f"{f.name} is not regular; {hash_class.value} is unattainable")
    elif hash_class is HashClass.BALANCED:
        if check_linear:
            check_homomorphism(f, budget)
        elif f.a_group is None:
            raise NotHomomorphicError(f"{f.name}: A needs a designated group structure")
        sub = f.a_group.sub

    best, witness = ParallelCollisionCounter(jobs).max_count(table, hash_class, n_a, sub)
    if witness is None:
        return EpsilonResult(hash_class, Fraction(0), 0, None)
    if hash_class in (HashClass.ACFU, HashClass.ASU):
        eps = Fraction(best * n_a, n_s)
    else:
        eps = Fraction(best, n_s)
    labels = (label(f.x_domain[witness[0]]), label(f.x_domain[witness[1]]))
    labels += tuple(label(f.a_domain[a]) for a in witness[2:])
    logger.debug(f"{f.name}: {hash_class.value} eps={eps} at {labels}")
    return EpsilonResult(hash_class, eps, best, labels, witness)


def optimal_epsilon(x_size: int, a_size: int) -> Fraction:
    if a_size < 2 or x_size <= a_size:
        raise TrivialDomainError(f"need |X| > |A| >= 2, got |X|={x_size}, |A|={a_size}")
    return Fraction(x_size - a_size, a_size * (x_size - 1))


def eq7_nonempty(x_size: int, a_size: int) -> bool:
    """Whether some feasible epsilon lets the variance bound apply, in integer arithmetic."""
    lhs = 2 * x_size - a_size * (a_size + 1)
    return lhs >= 0 and lhs * lhs >= a_size * a_size * (a_size + 3) * (a_size - 1)


@dataclass
class BoundReport:
    x_size: int
    a_size: int
    eps: Fraction
    optimal_eps: Fraction
    lb_variance: Fraction
    lb_simple: Fraction
    lb_ocfu: Optional[Fraction]
    lb_au: Fraction
    lb_au_simple: Fraction
    lb_asu_variance: Optional[Fraction]
    lb_asu_simple: Optional[Fraction]
    variance_applies: bool
    variance_interval_nonempty: bool
    asu_simple_dominates: bool
    s_size: Optional[int] = None
    equality: dict[str, bool] = field(default_factory=dict)

    BOUND_NAMES = (
        "lb_variance", "lb_simple", "lb_ocfu", "lb_au", "lb_au_simple", "lb_asu_variance", "lb_asu_simple",
    )

    @property
    def applicable(self) -> str:
        return "variance" if self.variance_applies else "simple"

    @property
    def acfu_bound(self) -> Fraction:
        """The stronger of the two ACFU bounds at eps."""
        return max(self.lb_variance, self.lb_simple)

    def to_dict(self) -> dict:
        out = {
            "x_size": self.x_size,
            "a_size": self.a_size,
            "eps": rational_str(self.eps),
            "optimal_eps": rational_str(self.optimal_eps),
            "applicable": self.applicable,
            "variance_applies": self.variance_applies,
            "variance_interval_nonempty": self.variance_interval_nonempty,
            "asu_simple_dominates": self.asu_simple_dominates,
        }
        for name in self.BOUND_NAMES:
            value = getattr(self, name)
            out[name] = rational_str(value) if value is not None else None
        if self.s_size is not None:
            out["s_size"] = self.s_size
            out["equality"] = dict(self.equality)
        return out


def seed_lower_bounds(x_size: int, a_size: int, eps: Fraction, s_size: Optional[int] = None) -> BoundReport:
    eps = Fraction(eps)
    opt = optimal_epsilon(x_size, a_size)
    if eps < opt or eps > 1:
        raise InfeasibleEpsilonError(f"eps={eps} lies outside the feasible range [{opt}, 1]")
    X, A = x_size, a_size
    denom = eps * A * (X - A) + A * A - X
    if denom <= 0:
        raise InfeasibleEpsilonError(f"variance bound denominator vanishes at eps={eps}")

    lb_asu_variance = lb_asu_simple = None
    if eps >= Fraction(1, A):
        lb_asu_variance = 1 + Fraction(X * (A - 1) ** 2) / (eps * A * (X - 1) + A - X)
        lb_asu_simple = A / eps

    report = BoundReport(
        x_size=X,
        a_size=A,
        eps=eps,
        optimal_eps=opt,
        lb_variance=1 + Fraction(X * (A - 1) ** 2) / denom,
        lb_simple=A / eps,
        lb_ocfu=Fraction(A * (X - 1), A - 1) if eps == opt else None,
        lb_au=Fraction(X * (A - 1)) / denom,
        lb_au_simple=1 / eps,
        lb_asu_variance=lb_asu_variance,
        lb_asu_simple=lb_asu_simple,
        variance_applies=eps * (X - A) <= X - A * A,
        variance_interval_nonempty=eq7_nonempty(X, A),
        asu_simple_dominates=eps * (X - 1) >= X - A,
        s_size=s_size,
    )
    if s_size is not None:
        report.equality = {
            name: getattr(report, name) == s_size
            for name in BoundReport.BOUND_NAMES
            if getattr(report, name) is not None
        }
    return report


def table1_row(x_size: int, a_size: int) -> dict:
    """Bound values at the optimal epsilon, with the strongest one named."""
    report = seed_lower_bounds(x_size, a_size, optimal_epsilon(x_size, a_size))
    candidates = {"lb_simple": report.lb_simple, "lb_ocfu": report.lb_ocfu}
    if report.variance_applies:
        candidates["lb_variance"] = report.lb_variance
    best = max(candidates, key=lambda k: (candidates[k], k))
    return {
        "x_size": x_size,
        "a_size": a_size,
        "optimal_eps": rational_str(report.optimal_eps),
        "lb_variance": rational_str(report.lb_variance),
        "lb_simple": rational_str(report.lb_simple),
        "lb_ocfu": rational_str(report.lb_ocfu),
        "variance_applies": report.variance_applies,
        "strongest": best,
    }


@dataclass
class VerificationReport:
    family: str
    sizes: tuple[int, int, int]
    regular: bool
    block_size: Optional[Fraction]
    eps: dict[HashClass, Fraction] = field(default_factory=dict)
    witnesses: dict[HashClass, Optional[tuple[str, ...]]] = field(default_factory=dict)
    absent: dict[HashClass, str] = field(default_factory=dict)
    bounds: Optional[BoundReport] = None
    ocfu: bool = False
    ou: bool = False

    @property
    def eps_au(self) -> Optional[Fraction]:
        return self.eps.get(HashClass.AU)

    @property
    def eps_acfu(self) -> Optional[Fraction]:
        return self.eps.get(HashClass.ACFU)

    @property
    def eps_asu(self) -> Optional[Fraction]:
        return self.eps.get(HashClass.ASU)

    @property
    def eps_balanced(self) -> Optional[Fraction]:
        return self.eps.get(HashClass.BALANCED)

    def to_dict(self) -> dict:
        x, s, a = self.sizes
        out = {
            "family": self.family,
            "x_size": x,
            "s_size": s,
            "a_size": a,
            "regular": self.regular,
            "block_size": rational_str(self.block_size) if self.block_size is not None else None,
            "ocfu": self.ocfu,
            "ou": self.ou,
        }
        for cls in HashClass:
            key = f"eps_{cls.value.lower()}"
            if cls in self.eps:
                out[key] = rational_str(self.eps[cls])
                witness = self.witnesses.get(cls)
                out[f"witness_{cls.value.lower()}"] = list(witness) if witness else None
            else:
                out[key] = self.absent.get(cls, "absent")
        out["bounds"] = self.bounds.to_dict() if self.bounds else None
        return out


def classify(f: HashFamily, budget: Optional[int] = None, jobs: Optional[int] = None) -> VerificationReport:
    index_table(f, budget)
    n_x, n_s, n_a = f.sizes
    reg = regularity_check(f, budget)
    report = VerificationReport(f.name, (n_x, n_s, n_a), reg.regular, reg.block_size)

    for cls in HashClass:
        try:
            result = min_epsilon(f, cls, budget, jobs)
        except NotRegularError:
            report.absent[cls] = "NotRegular"
            continue
        except NotHomomorphicError as exc:
            logger.debug(f"{f.name}: no balanced value ({exc})")
            report.absent[cls] = "NotHomomorphic"
            continue
        report.eps[cls] = result.eps
        report.witnesses[cls] = result.witness

    if n_x > n_a >= 2:
        opt = optimal_epsilon(n_x, n_a)
        report.ou = report.eps_au == opt
        report.ocfu = report.eps_acfu == opt
        if report.eps_acfu is not None:
            try:
                report.bounds = seed_lower_bounds(n_x, n_a, report.eps_acfu, s_size=n_s)
            except InfeasibleEpsilonError as exc:
                logger.warning(f"{f.name}: no bounds at eps_acfu ({exc})")

    logger.info(
        f"classified {f}: regular={reg.regular} "
        + " ".join(f"{c.value}={report.eps.get(c, report.absent.get(c))}" for c in HashClass)
    )
    return report
