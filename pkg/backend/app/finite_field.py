"""
Exact arithmetic in small finite fields GF(p^m).

Elements are coefficient vectors over the prime subfield, lowest degree
first. The canonical element order is lexicographic over that vector
(coefficient of degree 0 most significant); every domain index used by
the hash families downstream is derived from it.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterator, Optional, Sequence

from .errors import (
    BadLengthError,
    NotPrimeError,
    ReducibleModulusError,
    UnsupportedSizeError,
    ZeroInverseError,
)

logger = logging.getLogger(__name__)

MAX_FIELD_SIZE = 2 ** 16
BUILTIN_LIMIT = 64

# Irreducible monic moduli, lowest degree first, for every prime power <= 64
BUILTIN_MODULI: dict[tuple[int, int], tuple[int, ...]] = {
    (2, 2): (1, 1, 1),                # x^2 + x + 1
    (2, 3): (1, 1, 0, 1),             # x^3 + x + 1
    (2, 4): (1, 1, 0, 0, 1),          # x^4 + x + 1
    (2, 5): (1, 0, 1, 0, 0, 1),       # x^5 + x^2 + 1
    (2, 6): (1, 1, 0, 0, 0, 0, 1),    # x^6 + x + 1
    (3, 2): (1, 0, 1),                # x^2 + 1
    (3, 3): (1, 2, 0, 1),             # x^3 + 2x + 1
    (5, 2): (2, 0, 1),                # x^2 + 2
    (7, 2): (1, 0, 1),                # x^2 + 1
}


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def prime_power(q: int) -> Optional[tuple[int, int]]:
    """Return (p, m) with q = p^m, or None when q is not a prime power."""
    if q < 2:
        return None
    for p in range(2, q + 1):
        if q % p == 0:
            if not is_prime(p):
                return None
            m, rest = 0, q
            while rest % p == 0:
                rest //= p
                m += 1
            return (p, m) if rest == 1 else None
    return None


def _poly_mod(num: Sequence[int], den: Sequence[int], p: int) -> list[int]:
    """Remainder of num / den over GF(p); den must have a nonzero top coefficient."""
    rem = [c % p for c in num]
    deg_den = len(den) - 1
    inv_lead = pow(den[-1], p - 2, p)
    for d in range(len(rem) - 1, deg_den - 1, -1):
        c = rem[d] * inv_lead % p
        if c:
            shift = d - deg_den
            for i, coeff in enumerate(den):
                rem[shift + i] = (rem[shift + i] - c * coeff) % p
    return rem[:deg_den] if deg_den > 0 else []


def is_irreducible(p: int, modulus: Sequence[int]) -> bool:
    """Exhaustive factor check: no monic divisor of degree 1..m//2."""
    m = len(modulus) - 1
    if m < 1 or modulus[-1] % p == 0:
        return False
    if m == 1:
        return True
    for d in range(1, m // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            divisor = list(low) + [1]
            if not any(_poly_mod(modulus, divisor, p)):
                return False
    return True


@dataclass(frozen=True)
class FieldSpec:
    p: int
    m: int
    modulus: tuple[int, ...]

    @property
    def q(self) -> int:
        return self.p ** self.m

    def element(self, coeffs: Sequence[int]) -> "FieldElement":
        if len(coeffs) != self.m:
            raise BadLengthError(f"GF({self.q}) elements have {self.m} coefficients, got {len(coeffs)}")
        return FieldElement(self, tuple(int(c) % self.p for c in coeffs))

    def from_index(self, index: int) -> "FieldElement":
        return self.elements[index]

    def index(self, a: "FieldElement") -> int:
        value = 0
        for c in a.coeffs:
            value = value * self.p + c
        return value

    @cached_property
    def elements(self) -> tuple["FieldElement", ...]:
        return tuple(
            FieldElement(self, coeffs)
            for coeffs in itertools.product(range(self.p), repeat=self.m)
        )

    @property
    def zero(self) -> "FieldElement":
        return FieldElement(self, (0,) * self.m)

    @property
    def one(self) -> "FieldElement":
        return FieldElement(self, (1,) + (0,) * (self.m - 1))

    def nonzero(self) -> tuple["FieldElement", ...]:
        return self.elements[1:]

    def scalar(self, value: int) -> "FieldElement":
        """The prime-subfield element value mod p."""
        return FieldElement(self, (value % self.p,) + (0,) * (self.m - 1))

    def __str__(self) -> str:
        return f"GF({self.q})" if self.m == 1 else f"GF({self.p}^{self.m})"


@dataclass(frozen=True)
class FieldElement:
    field: FieldSpec
    coeffs: tuple[int, ...]

    def _check(self, other: "FieldElement") -> None:
        if not isinstance(other, FieldElement) or other.field != self.field:
            raise TypeError(f"cannot combine elements of {self.field} and {getattr(other, 'field', other)}")

    def __add__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        p = self.field.p
        return FieldElement(self.field, tuple((a + b) % p for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        p = self.field.p
        return FieldElement(self.field, tuple((a - b) % p for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self) -> "FieldElement":
        p = self.field.p
        return FieldElement(self.field, tuple((-a) % p for a in self.coeffs))

    def __mul__(self, other: "FieldElement") -> "FieldElement":
        self._check(other)
        f = self.field
        if f.m == 1:
            return FieldElement(f, ((self.coeffs[0] * other.coeffs[0]) % f.p,))
        product = [0] * (2 * f.m - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    product[i + j] += a * b
        return FieldElement(f, tuple(_poly_mod(product, f.modulus, f.p)))

    def __pow__(self, exponent: int) -> "FieldElement":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result, base = self.field.one, self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def inverse(self) -> "FieldElement":
        if self.is_zero:
            raise ZeroInverseError(f"0 has no inverse in {self.field}")
        return self ** (self.field.q - 2)

    def __truediv__(self, other: "FieldElement") -> "FieldElement":
        return self * other.inverse()

    @property
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __bool__(self) -> bool:
        return not self.is_zero

    def __int__(self) -> int:
        return self.field.index(self)

    def __str__(self) -> str:
        if self.field.m == 1:
            return str(self.coeffs[0])
        sep = "" if self.field.p <= 10 else "."
        return sep.join(map(str, self.coeffs))

    def __repr__(self) -> str:
        return f"FieldElement({self.field}, {self.coeffs})"


def field_new(p: int, m: int = 1, modulus: Optional[Sequence[int]] = None) -> FieldSpec:
    if not is_prime(p):
        raise NotPrimeError(f"{p} is not prime")
    if m < 1:
        raise BadLengthError(f"extension degree must be >= 1, got {m}")
    q = p ** m
    if q > MAX_FIELD_SIZE:
        raise UnsupportedSizeError(f"GF({q}) exceeds the supported size {MAX_FIELD_SIZE}")
    if m == 1:
        return FieldSpec(p, 1, (0, 1))
    if modulus is None:
        if q > BUILTIN_LIMIT or (p, m) not in BUILTIN_MODULI:
            raise UnsupportedSizeError(f"no built-in modulus for GF({p}^{m}); supply one")
        modulus = BUILTIN_MODULI[(p, m)]
    modulus = tuple(int(c) % p for c in modulus)
    if len(modulus) != m + 1 or modulus[-1] != 1:
        raise ReducibleModulusError(f"modulus must be monic of degree {m}: {modulus}")
    if not is_irreducible(p, modulus):
        raise ReducibleModulusError(f"{modulus} is reducible over GF({p})")
    return FieldSpec(p, m, modulus)


@lru_cache(maxsize=None)
def gf(q: int) -> FieldSpec:
    """Field with q elements from the built-in table."""
    pm = prime_power(q)
    if pm is None:
        raise NotPrimeError(f"{q} is not a prime power")
    return field_new(*pm)


def field_arith(spec: FieldSpec, op: str, a: FieldElement, b: Optional[FieldElement] = None) -> FieldElement:
    for operand in (a, b):
        if operand is not None and operand.field != spec:
            raise TypeError(f"operand {operand!r} is not an element of {spec}")
    if op in ("add", "sub", "mul") and b is None:
        raise TypeError(f"{op} needs two operands")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "neg":
        return -a
    if op == "inv":
        return a.inverse()
    raise ValueError(f"unknown field operation {op!r}")


def truncate(a: FieldElement, m: int, base: Optional[FieldSpec] = None) -> tuple[FieldElement, ...]:
    """
    First m coordinates of a over base (default: the prime subfield).

    A base GF(p^k) reads each coordinate from the next k prime-field
    coefficients, so the map is additive and onto base^m.
    """
    base = base or gf(a.field.p)
    if base.p != a.field.p:
        raise TypeError(f"{base} is not a coordinate field for {a.field}")
    k, n = base.m, a.field.m
    if n % k or not 1 <= m <= n // k:
        raise BadLengthError(f"cannot take {m} coordinates over {base} from an element of {a.field}")
    return tuple(base.element(a.coeffs[i * k:(i + 1) * k]) for i in range(m))


def vectors(field: FieldSpec, length: int) -> Iterator[tuple[FieldElement, ...]]:
    """All of field^length in lexicographic order."""
    return itertools.product(field.elements, repeat=length)


def dot(h: Sequence[FieldElement], x: Sequence[FieldElement]) -> FieldElement:
    total = h[0].field.zero
    for a, b in zip(h, x):
        total = total + a * b
    return total
