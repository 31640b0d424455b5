"""
Functions f: X x S -> A and the closed-form families built on finite fields.

A HashFamily keeps its three domains as ordered tuples of Python values
(field elements, tuples of them, or plain label strings) and evaluates
either through a rule or through a tabulated index array.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Hashable, Optional, Sequence

import numpy as np
from tqdm import tqdm

from ..config import get_settings
from .errors import BudgetExceededError, DomainError, HashDesignError, UnsupportedParametersError
from .finite_field import FieldElement, dot, field_new, gf, truncate, vectors

logger = logging.getLogger(__name__)

# Largest single domain the closed-form constructors will enumerate
MAX_DOMAIN = 2 ** 20

INFINITY = "inf"


def label(value: Any) -> str:
    """Canonical text label of a domain value."""
    if isinstance(value, tuple):
        return "(" + ",".join(label(v) for v in value) + ")"
    return str(value)


def _add(a: Any, b: Any) -> Any:
    if isinstance(a, tuple):
        return tuple(_add(u, v) for u, v in zip(a, b))
    return a + b


@dataclass(frozen=True, eq=False)
class GroupStructure:
    """Abelian group on a domain, stored as an index addition table."""

    add: np.ndarray
    zero: int

    @cached_property
    def neg(self) -> np.ndarray:
        n = len(self.add)
        out = np.empty(n, dtype=np.int64)
        for i in range(n):
            out[i] = int(np.flatnonzero(self.add[i] == self.zero)[0])
        return out

    @cached_property
    def sub(self) -> np.ndarray:
        """sub[i, j] = i - j."""
        return self.add[:, self.neg]

    @property
    def order(self) -> int:
        return len(self.add)

    @classmethod
    def from_elements(cls, elements: Sequence[Any]) -> "GroupStructure":
        """Elementary abelian group of field elements or field vectors under +."""
        index = {e: i for i, e in enumerate(elements)}
        n = len(elements)
        table = np.empty((n, n), dtype=np.int64)
        for i, a in enumerate(elements):
            for j, b in enumerate(elements):
                table[i, j] = index[_add(a, b)]
        # zero is the unique idempotent
        zero = next(i for i in range(n) if table[i, i] == i)
        return cls(table, zero)

    @classmethod
    def cyclic(cls, n: int) -> "GroupStructure":
        idx = np.arange(n)
        return cls((idx[:, None] + idx[None, :]) % n, 0)


@dataclass(frozen=True, eq=False)
class FunctionTable:
    """Exhaustive tabulation: rows[i, j] indexes a_labels for (x_i, s_j)."""

    x_labels: tuple[str, ...]
    s_labels: tuple[str, ...]
    a_labels: tuple[str, ...]
    rows: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows.shape


@dataclass(frozen=True, eq=False)
class HashFamily:
    name: str
    x_domain: tuple
    s_domain: tuple
    a_domain: tuple
    rule: Optional[Callable[[Any, Any], Any]] = None
    table: Optional[np.ndarray] = None
    params: dict = field(default_factory=dict)
    x_group: Optional[GroupStructure] = None
    a_group: Optional[GroupStructure] = None

    def __post_init__(self):
        if not self.a_domain:
            raise DomainError(f"{self.name}: value set A is empty")
        for role, dom in (("X", self.x_domain), ("S", self.s_domain), ("A", self.a_domain)):
            if len(set(dom)) != len(dom):
                raise DomainError(f"{self.name}: duplicate entries in {role}")
        if self.rule is None and self.table is None:
            raise DomainError(f"{self.name}: needs a rule or a table")

    @cached_property
    def x_index(self) -> dict[Hashable, int]:
        return {v: i for i, v in enumerate(self.x_domain)}

    @cached_property
    def s_index(self) -> dict[Hashable, int]:
        return {v: i for i, v in enumerate(self.s_domain)}

    @cached_property
    def a_index(self) -> dict[Hashable, int]:
        return {v: i for i, v in enumerate(self.a_domain)}

    @property
    def x_labels(self) -> tuple[str, ...]:
        return tuple(label(v) for v in self.x_domain)

    @property
    def s_labels(self) -> tuple[str, ...]:
        return tuple(label(v) for v in self.s_domain)

    @property
    def a_labels(self) -> tuple[str, ...]:
        return tuple(label(v) for v in self.a_domain)

    @property
    def sizes(self) -> tuple[int, int, int]:
        return len(self.x_domain), len(self.s_domain), len(self.a_domain)

    def value_index(self, i: int, j: int) -> int:
        if self.table is not None:
            return int(self.table[i, j])
        value = self.rule(self.x_domain[i], self.s_domain[j])
        try:
            return self.a_index[value]
        except KeyError:
            raise DomainError(f"{self.name}: value {label(value)} is outside A") from None

    def __str__(self) -> str:
        x, s, a = self.sizes
        return f"{self.name} (|X|={x}, |S|={s}, |A|={a})"


def evaluate(f: HashFamily, x: Any, s: Any) -> Any:
    try:
        i = f.x_index[x]
    except (KeyError, TypeError):
        raise DomainError(f"{label(x)} is not a point of {f.name}") from None
    try:
        j = f.s_index[s]
    except (KeyError, TypeError):
        raise DomainError(f"{label(s)} is not a seed of {f.name}") from None
    return f.a_domain[f.value_index(i, j)]


def index_table(f: HashFamily, budget: Optional[int] = None) -> np.ndarray:
    """|X| x |S| array of value indices, cached on the family."""
    cached = f.__dict__.get("_index_table")
    if cached is not None:
        return cached
    if f.table is not None:
        rows = np.asarray(f.table, dtype=np.int64)
    else:
        budget = budget or get_settings().table_budget
        n_x, n_s, _ = f.sizes
        if n_x * n_s > budget:
            raise BudgetExceededError(f"{f.name}: {n_x}x{n_s} table exceeds budget {budget}")
        rows = np.empty((n_x, n_s), dtype=np.int64)
        progress = get_settings().progress
        for i in tqdm(range(n_x), desc=f"tabulating {f.name}", disable=not progress):
            for j in range(n_s):
                rows[i, j] = f.value_index(i, j)
        logger.debug(f"tabulated {f}")
    rows.setflags(write=False)
    f.__dict__["_index_table"] = rows
    return rows


def to_table(f: HashFamily, budget: Optional[int] = None) -> FunctionTable:
    if budget is not None and f.table is not None:
        n_x, n_s, _ = f.sizes
        if n_x * n_s > budget:
            raise BudgetExceededError(f"{f.name}: {n_x}x{n_s} table exceeds budget {budget}")
    rows = index_table(f, budget)
    return FunctionTable(f.x_labels, f.s_labels, f.a_labels, rows)


def from_table(
    x_labels: Sequence[str],
    s_labels: Sequence[str],
    a_labels: Sequence[str],
    rows: Any,
    name: str = "table",
    x_group: Optional[GroupStructure] = None,
    a_group: Optional[GroupStructure] = None,
) -> HashFamily:
    """Family whose domains are the given labels; groups default to cyclic."""
    rows = np.asarray(rows, dtype=np.int64)
    if rows.shape != (len(x_labels), len(s_labels)):
        raise DomainError(f"{name}: table shape {rows.shape} does not match {len(x_labels)}x{len(s_labels)}")
    if rows.size and (rows.min() < 0 or rows.max() >= len(a_labels)):
        raise DomainError(f"{name}: table entries must index the {len(a_labels)} values of A")
    return HashFamily(
        name=name,
        x_domain=tuple(x_labels),
        s_domain=tuple(s_labels),
        a_domain=tuple(a_labels),
        table=rows,
        x_group=x_group or GroupStructure.cyclic(len(x_labels)),
        a_group=a_group or GroupStructure.cyclic(len(a_labels)),
    )


def constant_family(x_size: int, s_size: int, a_size: int, value: int = 0) -> HashFamily:
    rows = np.full((x_size, s_size), value, dtype=np.int64)
    return from_table(
        [f"x{i}" for i in range(x_size)],
        [f"s{j}" for j in range(s_size)],
        [str(k) for k in range(a_size)],
        rows,
        name="constant",
    )


def dual(f: HashFamily) -> HashFamily:
    """Argument swap: f~(s, x) = f(x, s)."""
    if f.table is not None:
        return HashFamily(
            name=f"dual({f.name})",
            x_domain=f.s_domain,
            s_domain=f.x_domain,
            a_domain=f.a_domain,
            table=np.asarray(f.table).T.copy(),
            params=dict(f.params),
            a_group=f.a_group,
        )
    rule = f.rule
    return HashFamily(
        name=f"dual({f.name})",
        x_domain=f.s_domain,
        s_domain=f.x_domain,
        a_domain=f.a_domain,
        rule=lambda x, s: rule(s, x),
        params=dict(f.params),
        a_group=f.a_group,
    )


def _check_size(name: str, *sizes: int) -> None:
    for size in sizes:
        if size > MAX_DOMAIN:
            raise UnsupportedParametersError(f"{name}: a domain of {size} values is too large to enumerate")


def _normalized(v: tuple[FieldElement, ...]) -> bool:
    for c in v:
        if not c.is_zero:
            return c == c.field.one
    return False


def _field(q: int, name: str):
    try:
        return gf(q)
    except HashDesignError as exc:
        raise UnsupportedParametersError(f"{name}: {exc}") from exc


def affine(q: int, t: int) -> HashFamily:
    """f(x; h, b) = h.x + b with h ranging over normalized nonzero vectors."""
    if t < 1:
        raise UnsupportedParametersError(f"affine: t must be >= 1, got {t}")
    F = _field(q, "affine")
    _check_size("affine", q ** t)
    xs = tuple(vectors(F, t))
    h_norm = [v for v in xs if _normalized(v)]
    seeds = tuple((h, b) for h in h_norm for b in F.elements)
    return HashFamily(
        name=f"affine(q={q},t={t})",
        x_domain=xs,
        s_domain=seeds,
        a_domain=F.elements,
        rule=lambda x, s: dot(s[0], x) + s[1],
        params={"kind": "affine", "q": q, "t": t},
        x_group=GroupStructure.from_elements(xs),
        a_group=GroupStructure.from_elements(F.elements),
    )


def dual_affine(q: int, t: int) -> HashFamily:
    base = affine(q, t)
    f = dual(base)
    return HashFamily(
        name=f"dual_affine(q={q},t={t})",
        x_domain=f.x_domain,
        s_domain=f.s_domain,
        a_domain=f.a_domain,
        rule=f.rule,
        params={"kind": "dual_affine", "q": q, "t": t},
        a_group=base.a_group,
    )


def transversal(q: int, H: Optional[Sequence[int]] = None, include_infinity: bool = False) -> HashFamily:
    """f(h, y; s1, s2) = s2 - h*s1 + y, with f(inf, y; s1, s2) = s1 + y."""
    F = _field(q, "transversal")
    if H is None:
        hs = F.elements
    else:
        if len(set(H)) != len(H) or any(not 0 <= h < q for h in H):
            raise UnsupportedParametersError(f"transversal: H must be distinct indices in [0, {q}), got {list(H)}")
        hs = tuple(F.from_index(h) for h in sorted(H))
    points = [(h, y) for h in hs for y in F.elements]
    if include_infinity:
        points += [(INFINITY, y) for y in F.elements]

    def rule(x, s):
        h, y = x
        s1, s2 = s
        if h == INFINITY:
            return s1 + y
        return s2 - h * s1 + y

    return HashFamily(
        name=f"transversal(q={q},|H|={len(hs)}{',inf' if include_infinity else ''})",
        x_domain=tuple(points),
        s_domain=tuple(vectors(F, 2)),
        a_domain=F.elements,
        rule=rule,
        params={"kind": "transversal", "q": q, "H": [int(h) for h in hs], "infinity": include_infinity},
        a_group=GroupStructure.from_elements(F.elements),
    )


def transversal_to_dual_affine(q: int) -> tuple[dict, dict]:
    """
    Relabeling (phi, psi) with transversal(q, F_q, inf)(x, s) ==
    dual_affine(q, 2)(phi[x], psi[s]) for every point and seed.
    """
    F = _field(q, "transversal")
    one, zero = F.one, F.zero
    phi = {}
    for h in F.elements:
        for y in F.elements:
            phi[(h, y)] = ((one, -h), y)
    for y in F.elements:
        phi[(INFINITY, y)] = ((zero, one), y)
    psi = {(s1, s2): (s2, s1) for s1, s2 in vectors(F, 2)}
    return phi, psi


def toeplitz_matrix(h: Sequence[FieldElement], m: int, n: int) -> list[list[FieldElement]]:
    return [[h[i - j + n - 1] for j in range(n)] for i in range(m)]


def toeplitz(q: int, m: int, n: int) -> HashFamily:
    """g(x, h) = T_h x for the m x n Toeplitz matrix with diagonals h."""
    if m < 1 or n < 1:
        raise UnsupportedParametersError(f"toeplitz: m and n must be >= 1, got m={m}, n={n}")
    F = _field(q, "toeplitz")
    _check_size("toeplitz", q ** n, q ** (m + n - 1))
    xs = tuple(vectors(F, n))
    seeds = tuple(vectors(F, m + n - 1))
    values = tuple(vectors(F, m))

    def rule(x, h):
        return tuple(dot(row, x) for row in toeplitz_matrix(h, m, n))

    return HashFamily(
        name=f"toeplitz(q={q},m={m},n={n})",
        x_domain=xs,
        s_domain=seeds,
        a_domain=values,
        rule=rule,
        params={"kind": "toeplitz", "q": q, "m": m, "n": n},
        x_group=GroupStructure.from_elements(xs),
        a_group=GroupStructure.from_elements(values),
    )


def field_multiply(q: int, n: int, m: int, exclude_zero: bool = False) -> HashFamily:
    """
    g(x, h) = first m coordinates over GF(q) of h*x in GF(q^n).

    For q = p^k the big field is GF(p^(kn)); each GF(q) coordinate is a block
    of k prime-field coefficients.
    """
    base = _field(q, "field_multiply")
    if not 1 <= m <= n:
        raise UnsupportedParametersError(f"field_multiply: need 1 <= m <= n, got m={m}, n={n}")
    try:
        big = field_new(base.p, base.m * n)
    except HashDesignError as exc:
        raise UnsupportedParametersError(f"field_multiply: {exc}") from exc
    xs = big.elements
    seeds = big.nonzero() if exclude_zero else big.elements
    values = tuple(vectors(base, m))
    return HashFamily(
        name=f"field_multiply(q={q},n={n},m={m}{',h!=0' if exclude_zero else ''})",
        x_domain=xs,
        s_domain=seeds,
        a_domain=values,
        rule=lambda x, h: truncate(h * x, m, base),
        params={"kind": "field_multiply", "q": q, "n": n, "m": m, "exclude_zero": exclude_zero},
        x_group=GroupStructure.from_elements(xs),
        a_group=GroupStructure.from_elements(values),
    )


BUILDERS: dict[str, Callable[..., HashFamily]] = {
    "affine": affine,
    "dual_affine": dual_affine,
    "transversal": transversal,
    "toeplitz": toeplitz,
    "field_multiply": field_multiply,
}


def build_named(kind: str, **params: Any) -> HashFamily:
    try:
        builder = BUILDERS[kind]
    except KeyError:
        raise UnsupportedParametersError(f"unknown family {kind!r}; choose from {sorted(BUILDERS)}") from None
    try:
        family = builder(**params)
    except TypeError as exc:
        raise UnsupportedParametersError(f"{kind}: {exc}") from exc
    logger.info(f"built {family}")
    return family
