"""
Incidence structures and mosaics.

A mosaic is the list of 0/1 matrices N_a, one per value a, with
N_a[x, s] = 1 iff f(x, s) = a. The helpers here move between functions
and mosaics, measure design parameters, search for resolutions and
cross-check the structure theorems that tie bound equality to designs.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from ..config import get_settings
from .errors import BadLabelingError, NotAMosaicError, SearchBudgetExceededError, StructureViolationError
from .finite_field import dot
from .hash_family import HashFamily, affine, from_table, index_table, label
from .models import rational_str
from .verify import VerificationReport, classify, seed_lower_bounds

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class IncidenceStructure:
    matrix: np.ndarray
    points: tuple[str, ...] = ()
    blocks: tuple[str, ...] = ()

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.int64)
        if m.ndim != 2 or not np.isin(m, (0, 1)).all():
            raise NotAMosaicError("an incidence matrix must be a 2-d 0/1 array")
        object.__setattr__(self, "matrix", m)
        if not self.points:
            object.__setattr__(self, "points", tuple(f"p{i}" for i in range(m.shape[0])))
        if not self.blocks:
            object.__setattr__(self, "blocks", tuple(f"B{j}" for j in range(m.shape[1])))

    @property
    def v(self) -> int:
        return self.matrix.shape[0]

    @property
    def b(self) -> int:
        return self.matrix.shape[1]

    def block(self, j: int) -> frozenset[int]:
        return frozenset(np.flatnonzero(self.matrix[:, j]).tolist())

    def transpose(self) -> "IncidenceStructure":
        return IncidenceStructure(self.matrix.T.copy(), self.blocks, self.points)


@dataclass(frozen=True, eq=False)
class Mosaic:
    members: tuple[IncidenceStructure, ...]
    a_labels: tuple[str, ...]

    @property
    def points(self) -> tuple[str, ...]:
        return self.members[0].points

    @property
    def blocks(self) -> tuple[str, ...]:
        return self.members[0].blocks

    def stack(self) -> np.ndarray:
        return np.stack([m.matrix for m in self.members])


def make_mosaic(matrices: Sequence[np.ndarray], a_labels: Sequence[str], points=(), blocks=()) -> Mosaic:
    members = tuple(IncidenceStructure(m, tuple(points), tuple(blocks)) for m in matrices)
    if not members:
        raise NotAMosaicError("a mosaic needs at least one member")
    shape = members[0].matrix.shape
    if any(m.matrix.shape != shape for m in members):
        raise NotAMosaicError("mosaic members differ in shape")
    if len(a_labels) != len(members):
        raise NotAMosaicError(f"{len(members)} members for {len(a_labels)} values")
    total = sum(m.matrix for m in members)
    off = np.argwhere(total != 1)
    if len(off):
        x, s = off[0]
        raise NotAMosaicError(f"cell ({x}, {s}) is covered {int(total[x, s])} times")
    return Mosaic(members, tuple(a_labels))


def mosaic_from_function(f: HashFamily, budget: Optional[int] = None) -> Mosaic:
    table = index_table(f, budget)
    matrices = [(table == a).astype(np.int64) for a in range(len(f.a_domain))]
    return make_mosaic(matrices, f.a_labels, f.x_labels, f.s_labels)


def function_from_mosaic(M: Mosaic, name: str = "mosaic") -> HashFamily:
    stack = M.stack()
    if not (stack.sum(axis=0) == 1).all():
        raise NotAMosaicError("members do not partition the all-ones matrix")
    return from_table(M.points, M.blocks, M.a_labels, stack.argmax(axis=0), name=name)


def dual_mosaic(M: Mosaic) -> Mosaic:
    return Mosaic(tuple(m.transpose() for m in M.members), M.a_labels)


def sum_mosaic(M: Mosaic) -> IncidenceStructure:
    """Blocks indexed by (s, a) in lexicographic order."""
    stack = M.stack()
    n_a, v, b = stack.shape
    matrix = stack.transpose(1, 2, 0).reshape(v, b * n_a)
    blocks = tuple(f"({s},{a})" for s in M.blocks for a in M.a_labels)
    return IncidenceStructure(matrix, M.points, blocks)


@dataclass(frozen=True)
class Resolution:
    classes: tuple[tuple[int, ...], ...]

    @property
    def class_size(self) -> int:
        return len(self.classes[0]) if self.classes else 0

    def validate(self, D: IncidenceStructure) -> bool:
        used = sorted(j for cls in self.classes for j in cls)
        if used != list(range(D.b)):
            return False
        return all((D.matrix[:, list(cls)].sum(axis=1) == 1).all() for cls in self.classes)

    def to_dict(self, D: Optional[IncidenceStructure] = None) -> dict:
        name = (lambda j: D.blocks[j]) if D is not None else str
        return {"class_size": self.class_size, "classes": [[name(j) for j in cls] for cls in self.classes]}


@dataclass(frozen=True)
class NotResolvable:
    reason: str
    nodes: int = 0

    def to_dict(self) -> dict:
        return {"resolvable": False, "reason": self.reason, "nodes": self.nodes}


@dataclass
class DesignParams:
    v: int
    b: int
    k: Optional[int]
    r: Optional[int]
    lam: Optional[int]
    intersection_numbers: tuple[int, ...]
    is_bibd: bool
    quasi_symmetric: bool
    symmetric: bool
    eq1_holds: Optional[bool]
    eq2_holds: Optional[bool]
    affine_count: Optional[bool]
    resolution: Optional[Resolution] = None

    @property
    def mu(self) -> Optional[Fraction]:
        """(k-1)(lam-1)/(r-1) + 1, the nonzero intersection number of an affine-like QS design."""
        if not self.is_bibd or self.r in (None, 1):
            return None
        return Fraction((self.k - 1) * (self.lam - 1), self.r - 1) + 1

    def to_dict(self) -> dict:
        out = {
            "v": self.v,
            "b": self.b,
            "k": self.k,
            "r": self.r,
            "lambda": self.lam,
            "intersection_numbers": list(self.intersection_numbers),
            "bibd": self.is_bibd,
            "quasi_symmetric": self.quasi_symmetric,
            "symmetric": self.symmetric,
            "eq1_holds": self.eq1_holds,
            "eq2_holds": self.eq2_holds,
            "affine_count": self.affine_count,
        }
        if self.mu is not None:
            out["mu"] = rational_str(self.mu)
        if self.resolution is not None:
            out["resolution"] = self.resolution.to_dict()
        return out


def _constant(values: np.ndarray) -> Optional[int]:
    if values.size and (values == values.flat[0]).all():
        return int(values.flat[0])
    return None


def analyze_structure(D: IncidenceStructure) -> DesignParams:
    N = D.matrix
    v, b = N.shape
    k = _constant(N.sum(axis=0))
    r = _constant(N.sum(axis=1))
    pairs = N @ N.T
    lam = _constant(pairs[~np.eye(v, dtype=bool)]) if v >= 2 else None
    meets = N.T @ N
    intersections = tuple(sorted(set(meets[~np.eye(b, dtype=bool)].tolist()))) if b >= 2 else ()
    is_bibd = v >= 2 and None not in (k, r, lam)
    eq1 = b * k == v * r if None not in (k, r) else None
    eq2 = lam * (v - 1) == r * (k - 1) if is_bibd else None
    return DesignParams(
        v=v,
        b=b,
        k=k,
        r=r,
        lam=lam,
        intersection_numbers=intersections,
        is_bibd=is_bibd,
        quasi_symmetric=is_bibd and len(intersections) == 2,
        symmetric=is_bibd and len(intersections) == 1,
        eq1_holds=eq1,
        eq2_holds=eq2,
        affine_count=b == v + r - 1 if r is not None else None,
    )


def find_resolution(D: IncidenceStructure, budget: Optional[int] = None) -> Resolution | NotResolvable:
    """
    Exact-cover search for parallel classes.

    Each class starts with the smallest unused nonempty block and is grown by
    covering the lowest uncovered point; empty blocks pad the classes last.
    """
    budget = budget or get_settings().search_budget
    N = D.matrix
    v, b = N.shape
    r = _constant(N.sum(axis=1))
    if r is None or r == 0:
        return NotResolvable("replication number is not constant")
    if b % r:
        return NotResolvable(f"{b} blocks do not split into {r} classes of equal size")
    class_size = b // r

    masks = [sum(1 << int(x) for x in np.flatnonzero(N[:, j])) for j in range(b)]
    full = (1 << v) - 1
    empties = [j for j in range(b) if masks[j] == 0]
    by_point = [[j for j in range(b) if masks[j] >> x & 1] for x in range(v)]
    unused = [masks[j] != 0 for j in range(b)]
    classes: list[list[int]] = []
    nodes = 0

    def tick():
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise SearchBudgetExceededError(f"resolution search exceeded {budget} nodes")

    def start_class() -> bool:
        tick()
        first = next((j for j in range(b) if unused[j]), None)
        if first is None:
            return True
        unused[first] = False
        classes.append([first])
        if grow(masks[first]):
            return True
        classes.pop()
        unused[first] = True
        return False

    def grow(covered: int) -> bool:
        tick()
        if covered == full:
            return start_class()
        current = classes[-1]
        if len(current) >= class_size:
            return False
        point = ((~covered) & full & -((~covered) & full)).bit_length() - 1
        for j in by_point[point]:
            if unused[j] and not masks[j] & covered:
                unused[j] = False
                current.append(j)
                if grow(covered | masks[j]):
                    return True
                current.pop()
                unused[j] = True
        return False

    if not start_class():
        return NotResolvable("exhaustive search found no resolution", nodes)
    if len(classes) != r:
        return NotResolvable(f"search produced {len(classes)} classes, expected {r}", nodes)
    pad = iter(empties)
    result = []
    for cls in classes:
        cls = cls + [next(pad) for _ in range(class_size - len(cls))]
        result.append(tuple(sorted(cls)))
    logger.debug(f"resolution with {r} classes of size {class_size} after {nodes} nodes")
    return Resolution(tuple(result))


def mosaic_from_resolution(
    D: IncidenceStructure,
    res: Resolution,
    a_labels: Sequence[str],
    labeling: Optional[Sequence[Sequence[str]]] = None,
) -> Mosaic:
    """Member a collects, per parallel class, the block labeled a."""
    n_a = len(a_labels)
    if res.class_size != n_a:
        raise BadLabelingError(f"classes have {res.class_size} blocks but there are {n_a} values")
    if labeling is None:
        labeling = [list(a_labels)] * len(res.classes)
    if len(labeling) != len(res.classes):
        raise BadLabelingError(f"{len(labeling)} labelings for {len(res.classes)} classes")
    position = {a: i for i, a in enumerate(a_labels)}
    v = D.v
    matrices = np.zeros((n_a, v, len(res.classes)), dtype=np.int64)
    for h, (cls, labels) in enumerate(zip(res.classes, labeling)):
        if sorted(labels) != sorted(a_labels) or len(set(labels)) != n_a:
            raise BadLabelingError(f"class {h} is labeled {list(labels)}, not a permutation of the values")
        for j, a in zip(cls, labels):
            matrices[position[a], :, h] = D.matrix[:, j]
    return make_mosaic(list(matrices), a_labels, D.points, tuple(f"c{h}" for h in range(len(res.classes))))


def structure_signature(D: IncidenceStructure) -> tuple:
    """Invariants shared by isomorphic structures."""
    N = D.matrix
    return (
        D.v,
        D.b,
        tuple(sorted(N.sum(axis=1).tolist())),
        tuple(sorted(N.sum(axis=0).tolist())),
        tuple(sorted((N.T @ N).ravel().tolist())),
    )


def _column_multiset(N: np.ndarray, rows: list[int]) -> Counter:
    sub = np.ascontiguousarray(N[rows].T)
    return Counter(col.tobytes() for col in sub)


def find_isomorphism(
    D1: IncidenceStructure, D2: IncidenceStructure, budget: Optional[int] = None
) -> Optional[tuple[list[int], list[int]]]:
    """
    Point bijection pi and block bijection sigma with D1[x, j] == D2[pi[x], sigma[j]],
    or None. Backtracks over points; the multiset of block columns restricted
    to the assigned points must agree at every step.
    """
    if structure_signature(D1) != structure_signature(D2):
        return None
    budget = budget or get_settings().search_budget
    A, B = D1.matrix, D2.matrix
    v = D1.v
    deg1, deg2 = A.sum(axis=1), B.sum(axis=1)
    order = sorted(range(v), key=lambda x: (-int(deg1[x]), x))
    image: list[int] = []
    taken = [False] * v
    nodes = 0

    def extend(i: int) -> bool:
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            raise SearchBudgetExceededError(f"isomorphism search exceeded {budget} nodes")
        if i == v:
            return True
        x = order[i]
        for y in range(v):
            if taken[y] or deg2[y] != deg1[x]:
                continue
            image.append(y)
            if _column_multiset(A, order[: i + 1]) == _column_multiset(B, image):
                taken[y] = True
                if extend(i + 1):
                    return True
                taken[y] = False
            image.pop()
        return False

    if not extend(0):
        return None
    pi = [0] * v
    for x, y in zip(order, image):
        pi[x] = y
    # match equal columns of A and of B permuted by pi
    permuted = np.empty_like(B)
    permuted[order] = B[image]
    pool: dict[bytes, list[int]] = {}
    for j in range(D2.b):
        pool.setdefault(np.ascontiguousarray(permuted[:, j]).tobytes(), []).append(j)
    sigma = [pool[np.ascontiguousarray(A[:, j]).tobytes()].pop(0) for j in range(D1.b)]
    return pi, sigma


def is_isomorphic(D1: IncidenceStructure, D2: IncidenceStructure, budget: Optional[int] = None) -> bool:
    return find_isomorphism(D1, D2, budget) is not None


def point_classes(D: IncidenceStructure) -> list[list[int]]:
    """Classes of the relation 'x = x' or no block contains both'."""
    pairs = D.matrix @ D.matrix.T
    seen: set[int] = set()
    classes = []
    for x in range(D.v):
        if x in seen:
            continue
        cls = [y for y in range(D.v) if y == x or pairs[x, y] == 0]
        seen.update(cls)
        classes.append(cls)
    return classes


def is_net(D: IncidenceStructure) -> bool:
    """Points split into classes; same-class pairs share no block, cross-class pairs exactly one."""
    pairs = D.matrix @ D.matrix.T
    classes = point_classes(D)
    which = {x: c for c, cls in enumerate(classes) for x in cls}
    if sum(len(c) for c in classes) != D.v:
        return False
    for x in range(D.v):
        for y in range(x + 1, D.v):
            same = which[x] == which[y]
            if (same and pairs[x, y] != 0) or (not same and pairs[x, y] != 1):
                return False
    return len(classes) > 1


def fano_plane() -> IncidenceStructure:
    lines = [(0, 1, 2), (0, 3, 4), (0, 5, 6), (1, 3, 5), (1, 4, 6), (2, 3, 6), (2, 4, 5)]
    N = np.zeros((7, 7), dtype=np.int64)
    for j, line in enumerate(lines):
        N[list(line), j] = 1
    return IncidenceStructure(N)


def affine_hyperplane_design(q: int, t: int) -> IncidenceStructure:
    """Points of F_q^t against the hyperplanes h.x = c, h normalized, ordered by (h, c)."""
    f = affine(q, t)
    normals = list(dict.fromkeys(h for h, _ in f.s_domain))
    blocks, columns = [], []
    for h in normals:
        for c in f.a_domain:
            columns.append([int(dot(h, x) == c) for x in f.x_domain])
            blocks.append(f"{label(h)}={label(c)}")
    return IncidenceStructure(np.array(columns, dtype=np.int64).T, f.x_labels, tuple(blocks))


@dataclass
class TheoremCheck:
    name: str
    holds: bool
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "holds": self.holds, "detail": self.detail}


@dataclass
class TheoremReport:
    family: str
    checks: list[TheoremCheck] = field(default_factory=list)
    members: list[DesignParams] = field(default_factory=list)
    undetermined: list[str] = field(default_factory=list)

    @property
    def violations(self) -> list[TheoremCheck]:
        return [c for c in self.checks if not c.holds]

    def add(self, name: str, holds: bool, detail: str) -> None:
        self.checks.append(TheoremCheck(name, bool(holds), detail))
        if not holds:
            logger.warning(f"{self.family}: {name} violated ({detail})")

    def raise_for_violations(self) -> None:
        if self.violations:
            raise StructureViolationError(
                f"{self.family}: " + "; ".join(f"{c.name}: {c.detail}" for c in self.violations)
            )

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "checks": [c.to_dict() for c in self.checks],
            "members": [m.to_dict() for m in self.members],
            "violations": len(self.violations),
            "undetermined": list(self.undetermined),
        }


def check_structure_theorems(
    f: HashFamily,
    report: Optional[VerificationReport] = None,
    budget: Optional[int] = None,
) -> TheoremReport:
    report = report or classify(f, budget)
    n_x, n_s, n_a = f.sizes
    out = TheoremReport(f.name)
    M = mosaic_from_function(f, budget)
    out.members = [analyze_structure(m) for m in M.members]

    if report.ocfu:
        eps = report.eps_acfu
        lam = eps * n_s / n_a
        for a, p in zip(M.a_labels, out.members):
            ok = (
                p.is_bibd
                and p.v == n_x
                and Fraction(p.k or 0) == Fraction(n_x, n_a)
                and Fraction(p.lam or 0) == lam
                and p.b == n_s
                and Fraction(p.r or 0) == Fraction(n_s, n_a)
            )
            out.add(
                "ocfu_members_bibd",
                ok,
                f"member {a}: v={p.v} k={p.k} lambda={p.lam} b={p.b} r={p.r}, expected lambda={lam}",
            )
            if p.r is not None:
                out.add("ocfu_block_count", p.b >= p.v + p.r - 1, f"member {a}: b={p.b} v+r-1={p.v + p.r - 1}")

    if report.regular and report.bounds is not None and report.bounds.lb_variance == n_s:
        eps = report.eps_acfu
        lam = Fraction(n_x * (n_s - n_a), n_a * n_a * (n_s - 1))
        mu = eps * n_s / n_a
        for a, member in zip(M.a_labels, dual_mosaic(M).members):
            p = analyze_structure(member)
            ok = (
                p.quasi_symmetric
                and Fraction(p.lam) == lam
                and Fraction(p.k) == Fraction(n_s, n_a)
                and set(p.intersection_numbers) == {0, mu}
                and p.mu == mu
            )
            out.add(
                "variance_equality_dual_quasi_symmetric",
                ok,
                f"dual member {a}: lambda={p.lam} k={p.k} intersections={list(p.intersection_numbers)}, "
                f"expected lambda={lam} intersections=[0, {mu}]",
            )
            out.add("variance_equality_not_symmetric", not p.symmetric, f"dual member {a} symmetric={p.symmetric}")

    if report.ou:
        total = sum_mosaic(M)
        p = analyze_structure(total)
        out.add("ou_sum_bibd", p.is_bibd, f"sum: k={p.k} r={p.r} lambda={p.lam}")
        try:
            res = find_resolution(total)
        except SearchBudgetExceededError as exc:
            logger.warning(f"{f.name}: sum resolvability undetermined ({exc})")
            out.undetermined.append(f"ou_sum_resolvable: {exc}")
        else:
            out.add(
                "ou_sum_resolvable",
                isinstance(res, Resolution),
                "sum resolution found" if isinstance(res, Resolution) else res.reason,
            )
        au_bounds = seed_lower_bounds(n_x, n_a, report.eps_au, s_size=n_s)
        if au_bounds.lb_au == n_s:
            out.add(
                "ou_tight_sum_affine",
                p.quasi_symmetric and p.affine_count,
                f"sum: intersections={list(p.intersection_numbers)} b={p.b} v+r-1={p.v + (p.r or 0) - 1}",
            )

    if report.regular and report.eps_asu is not None and report.eps_asu * n_a >= 1:
        p = analyze_structure(sum_mosaic(dual_mosaic(M)))
        if p.quasi_symmetric and 0 in p.intersection_numbers:
            asu = seed_lower_bounds(n_x, n_a, report.eps_asu, s_size=n_s)
            out.add(
                "asu_quasi_symmetric_dual_sum_tight",
                asu.lb_asu_variance == n_s,
                f"|S|={n_s} asu variance bound={asu.lb_asu_variance}",
            )

    logger.info(f"{f.name}: {len(out.checks)} theorem checks, {len(out.violations)} violated")
    return out
