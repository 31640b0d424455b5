"""
Exact privacy amplification: the key A = f(X, S) drawn with a uniform
public seed S, judged against an adversary holding Z and S.

All probabilities are Fractions held in numpy object arrays; floats only
appear in the final logarithm and square root.
"""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ..config import get_settings
from .errors import (
    AlphabetMismatchError,
    BadSourceError,
    BudgetExceededError,
    InfeasibleEpsilonError,
    NegativeRadicandError,
    TheoremViolationError,
    ZeroMassKeyValueError,
)
from .hash_family import HashFamily, index_table
from .models import rational_str, real_str
from .verify import HashClass, min_epsilon

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class JointSource:
    """p[x, z] = P(X = x, Z = z), every z with positive mass."""

    x_labels: tuple[str, ...]
    z_labels: tuple[str, ...]
    p: np.ndarray

    @property
    def p_z(self) -> list[Fraction]:
        return [sum(self.p[:, j], Fraction(0)) for j in range(len(self.z_labels))]

    def with_x_labels(self, labels: Sequence[str]) -> "JointSource":
        if len(labels) != len(self.x_labels):
            raise AlphabetMismatchError(f"{len(labels)} labels for {len(self.x_labels)} x values")
        return JointSource(tuple(labels), self.z_labels, self.p)

    def to_dict(self) -> dict:
        return {
            "x_labels": list(self.x_labels),
            "z_labels": list(self.z_labels),
            "probabilities": [[rational_str(c) for c in row] for row in self.p],
        }


def make_source(x_labels: Sequence[str], z_labels: Sequence[str], probabilities) -> JointSource:
    p = np.empty((len(x_labels), len(z_labels)), dtype=object)
    rows = list(probabilities)
    if len(rows) != len(x_labels) or any(len(r) != len(z_labels) for r in rows):
        raise BadSourceError(f"probability table must be {len(x_labels)}x{len(z_labels)}")
    for i, row in enumerate(rows):
        for j, cell in enumerate(row):
            value = Fraction(cell)
            if value < 0:
                raise BadSourceError(f"negative probability at ({x_labels[i]}, {z_labels[j]})")
            p[i, j] = value
    total = sum(p.ravel(), Fraction(0))
    if total != 1:
        raise BadSourceError(f"probabilities sum to {total}, not 1")
    keep = [j for j in range(len(z_labels)) if any(p[i, j] for i in range(len(x_labels)))]
    if len(keep) < len(z_labels):
        dropped = [z_labels[j] for j in range(len(z_labels)) if j not in keep]
        logger.warning(f"dropping zero-mass z values {dropped}")
    return JointSource(tuple(x_labels), tuple(z_labels[j] for j in keep), p[:, keep])


def uniform_source(x_labels: Sequence[str]) -> JointSource:
    """Uniform X with a constant Z."""
    n = len(x_labels)
    return make_source(x_labels, ["*"], [[Fraction(1, n)] for _ in range(n)])


def symmetric_source(q: int, flip: Fraction) -> JointSource:
    """Uniform X on q symbols; Z = X except with probability flip, then uniform over the others."""
    flip = Fraction(flip)
    labels = [str(i) for i in range(q)]
    stay = (1 - flip) / q
    other = flip / (q * (q - 1)) if q > 1 else Fraction(0)
    rows = [[stay if i == j else other for j in range(q)] for i in range(q)]
    return make_source(labels, labels, rows)


def renyi2_conditional(src: JointSource) -> tuple[float, Fraction]:
    """(H2(X|Z) in bits, the exact inner sum sum_z p_z.p_z / p_z.j)."""
    inner = Fraction(0)
    for j in range(len(src.z_labels)):
        column = src.p[:, j]
        mass = sum(column, Fraction(0))
        inner += sum((c * c for c in column), Fraction(0)) / mass
    return -math.log2(inner), inner


def iid_extend(src: JointSource, n: int, budget: Optional[int] = None) -> JointSource:
    """n independent copies of (X, Z); labels become tuples."""
    if n < 1:
        raise BadSourceError(f"repetitions must be >= 1, got {n}")
    if n == 1:
        return src
    budget = budget or get_settings().table_budget
    n_x, n_z = len(src.x_labels), len(src.z_labels)
    if (n_x * n_z) ** n > budget:
        raise BudgetExceededError(f"{n}-fold product of a {n_x}x{n_z} source exceeds budget {budget}")
    xs = list(itertools.product(range(n_x), repeat=n))
    zs = list(itertools.product(range(n_z), repeat=n))
    p = np.empty((len(xs), len(zs)), dtype=object)
    for a, xi in enumerate(xs):
        for b, zi in enumerate(zs):
            value = Fraction(1)
            for x, z in zip(xi, zi):
                value *= src.p[x, z]
            p[a, b] = value
    x_labels = tuple("(" + ",".join(src.x_labels[x] for x in xi) + ")" for xi in xs)
    z_labels = tuple("(" + ",".join(src.z_labels[z] for z in zi) + ")" for zi in zs)
    return JointSource(x_labels, z_labels, p)


@dataclass
class JointResult:
    joint: np.ndarray  # joint[z, s, a] = P(Z = z, S = s, A = a)
    key_marginal: list[Fraction]
    independence_verified: bool
    independence_witness: Optional[tuple[str, str]]


def pa_joint(src: JointSource, f: HashFamily) -> JointResult:
    """P(Z, S, A) for a uniform seed, with the check P(Z = z, A = a) = P(Z = z) / |A|."""
    if sorted(src.x_labels) != sorted(f.x_labels):
        raise AlphabetMismatchError(f"source alphabet does not match the points of {f.name}")
    table = index_table(f)
    n_x, n_s, n_a = f.sizes
    point = {lab: i for i, lab in enumerate(f.x_labels)}
    n_z = len(src.z_labels)
    joint = np.full((n_z, n_s, n_a), Fraction(0), dtype=object)
    seed_weight = Fraction(1, n_s)
    for j in range(n_z):
        for i, lab in enumerate(src.x_labels):
            mass = src.p[i, j]
            if not mass:
                continue
            row = table[point[lab]]
            weight = mass * seed_weight
            for s in range(n_s):
                joint[j, s, row[s]] += weight
    key_marginal = [sum(joint[:, :, a].ravel(), Fraction(0)) for a in range(n_a)]

    p_z = src.p_z
    witness = None
    for j in range(n_z):
        for a in range(n_a):
            if sum(joint[j, :, a], Fraction(0)) != p_z[j] / n_a:
                witness = (src.z_labels[j], f.a_labels[a])
                break
        if witness:
            break
    return JointResult(joint, key_marginal, witness is None, witness)


def security_distance(joint: np.ndarray, a_labels: Optional[Sequence[str]] = None) -> tuple[Fraction, Optional[tuple[int, int]]]:
    """max over a < a' of the l1 distance between P(Z, S | A = a) and P(Z, S | A = a')."""
    n_a = joint.shape[2]
    conditionals = []
    for a in range(n_a):
        mass = sum(joint[:, :, a].ravel(), Fraction(0))
        if mass == 0:
            name = a_labels[a] if a_labels else str(a)
            raise ZeroMassKeyValueError(f"key value {name} has probability 0")
        conditionals.append([c / mass for c in joint[:, :, a].ravel()])
    best, witness = Fraction(0), None
    for a in range(n_a):
        for b in range(a + 1, n_a):
            d = sum((abs(u - v) for u, v in zip(conditionals[a], conditionals[b])), Fraction(0))
            if witness is None or d > best:
                best, witness = d, (a, b)
    return best, witness


def theorem_radicand(eps: Fraction, a_size: int, renyi_inner: Fraction) -> Fraction:
    """(1 - eps)|A| 2^-H + |A| eps - 1, exactly."""
    eps = Fraction(eps)
    if not 0 <= eps <= 1:
        raise InfeasibleEpsilonError(f"eps={eps} outside [0, 1]")
    return (1 - eps) * a_size * Fraction(renyi_inner) + a_size * eps - 1


def theorem_bound(eps: Fraction, a_size: int, renyi_inner: Fraction) -> float:
    radicand = theorem_radicand(eps, a_size, renyi_inner)
    if radicand < 0:
        raise NegativeRadicandError(f"radicand {radicand} < 0 for eps={eps}, |A|={a_size}, 2^-H={renyi_inner}")
    return 2 * math.sqrt(radicand)


def squared_dominance(distance: Fraction, radicand: Fraction) -> bool:
    return Fraction(distance) ** 2 <= 4 * Fraction(radicand)


def bilinear_form_holds(f: HashFamily, eps: Fraction, vectors: Sequence[Sequence[Fraction]]) -> Optional[tuple[str, int]]:
    """
    Vectors are indexed in the point order of f.

    Check p N_a N_a^T p <= (|S|/|A|)((1 - eps) p.p + eps (p.j)^2) for every member
    and test vector; returns the first failure (value label, vector index) or None.
    """
    table = index_table(f)
    n_x, n_s, n_a = f.sizes
    eps = Fraction(eps)
    for k, p in enumerate(vectors):
        p = [Fraction(c) for c in p]
        pp = sum((c * c for c in p), Fraction(0))
        pj = sum(p, Fraction(0))
        rhs = Fraction(n_s, n_a) * ((1 - eps) * pp + eps * pj * pj)
        for a in range(n_a):
            lhs = Fraction(0)
            for s in range(n_s):
                col = sum((p[x] for x in range(n_x) if table[x, s] == a), Fraction(0))
                lhs += col * col
            if lhs > rhs:
                return f.a_labels[a], k
    return None


@dataclass
class PAResult:
    family: str
    key_marginal: list[Fraction]
    independence_verified: bool
    security_distance: Fraction
    distance_witness: Optional[tuple[str, str]]
    entropy_h2: float
    renyi_inner: Fraction
    eps: Fraction
    radicand: Fraction
    theorem_bound: float

    @property
    def dominated(self) -> bool:
        return squared_dominance(self.security_distance, self.radicand)

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "key_marginal": [rational_str(p) for p in self.key_marginal],
            "independence_verified": self.independence_verified,
            "security_distance": rational_str(self.security_distance),
            "security_distance_real": real_str(self.security_distance),
            "distance_witness": list(self.distance_witness) if self.distance_witness else None,
            "entropy_h2": real_str(self.entropy_h2),
            "renyi_inner": rational_str(self.renyi_inner),
            "eps_acfu": rational_str(self.eps),
            "radicand": rational_str(self.radicand),
            "theorem_bound": real_str(self.theorem_bound),
            "dominated": self.dominated,
        }


def run_pa(src: JointSource, f: HashFamily) -> PAResult:
    joint = pa_joint(src, f)
    distance, pair = security_distance(joint.joint, f.a_labels)
    h2, inner = renyi2_conditional(src)
    eps = min_epsilon(f, HashClass.ACFU).eps
    radicand = theorem_radicand(eps, len(f.a_domain), inner)
    bound = theorem_bound(eps, len(f.a_domain), inner)
    result = PAResult(
        family=f.name,
        key_marginal=joint.key_marginal,
        independence_verified=joint.independence_verified,
        security_distance=distance,
        distance_witness=(f.a_labels[pair[0]], f.a_labels[pair[1]]) if pair else None,
        entropy_h2=h2,
        renyi_inner=inner,
        eps=eps,
        radicand=radicand,
        theorem_bound=bound,
    )
    if not result.dominated:
        dump = {
            "result": result.to_dict(),
            "source": src.to_dict(),
            "joint": [[[rational_str(c) for c in cell] for cell in plane] for plane in joint.joint],
        }
        raise TheoremViolationError(
            f"{f.name}: distance {distance} exceeds the bound 2*sqrt({radicand})", dump=dump
        )
    if not joint.independence_verified:
        logger.warning(f"{f.name}: key not independent of Z at {joint.independence_witness}")
    logger.info(
        f"{f.name}: distance={real_str(distance)} bound={real_str(bound)} H2={real_str(h2)}"
    )
    return result


def source_rows(src: JointSource) -> list[list[Fraction]]:
    """Columns p_z of the source as vectors over X."""
    return [list(src.p[:, j]) for j in range(len(src.z_labels))]

