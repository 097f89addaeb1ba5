"""Exact arithmetic and enumeration for the Galois field GF(p^s).

An element is a vector of s digits modulo p, read as coefficients of
1, x, ..., x^(s-1) in the polynomial basis.  Multiplication reduces
modulo a monic irreducible polynomial of degree s whose lower
coefficients are stored in ``FieldParams.reduction_poly`` (the x^s
coefficient is implicitly 1).  Values are immutable and hashable, so
they can serve as dictionary keys in the window tables built on top
of this module.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass

from .errors import ParameterError

__all__ = [
    "FieldParams",
    "GFElem",
    "gf_add",
    "gf_sub",
    "gf_neg",
    "gf_mul",
    "gf_modulus",
    "gf_enumerate",
    "gf_index",
    "gf_from_index",
    "default_reduction_poly",
    "is_irreducible",
]


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def _poly_rem(a: list[int], m: tuple[int, ...], p: int) -> list[int]:
    """Remainder of ``a`` modulo the monic polynomial ``m``.

    Coefficient lists run from x^0 upward; ``m`` includes its leading 1.
    """
    a = list(a)
    deg_m = len(m) - 1
    while len(a) > deg_m:
        c = a.pop()
        if c:
            off = len(a) - deg_m
            for i in range(deg_m):
                a[off + i] = (a[off + i] - c * m[i]) % p
    while a and a[-1] == 0:
        a.pop()
    return a


@functools.lru_cache(maxsize=None)
def is_irreducible(p: int, low_coeffs: tuple[int, ...]) -> bool:
    """Whether x^s + sum(low_coeffs[i] x^i) is irreducible over GF(p).

    Trial division by every monic polynomial of degree at most s/2.
    """
    s = len(low_coeffs)
    if s == 0:
        return False
    if s == 1:
        return True
    full = tuple(low_coeffs) + (1,)
    for d in range(1, s // 2 + 1):
        for tail in itertools.product(range(p), repeat=d):
            divisor = tail + (1,)
            if not _poly_rem(list(full), divisor, p):
                return False
    return True


def default_reduction_poly(p: int, s: int) -> tuple[int, ...]:
    """Lexicographically smallest monic irreducible of degree s over GF(p)."""
    for coeffs in itertools.product(range(p), repeat=s):
        if is_irreducible(p, coeffs):
            return coeffs
    raise ParameterError(f"no irreducible polynomial of degree {s} over GF({p})")


@dataclass(frozen=True)
class FieldParams:
    """Parameters of GF(p^s): prime p, extension degree s, reduction polynomial."""

    p: int
    s: int
    reduction_poly: tuple[int, ...]

    def __post_init__(self):
        if not isinstance(self.p, int) or not _is_prime(self.p):
            raise ParameterError(f"p must be a prime integer, got {self.p!r}")
        if not isinstance(self.s, int) or self.s < 1:
            raise ParameterError(f"s must be an integer >= 1, got {self.s!r}")
        poly = tuple(int(c) for c in self.reduction_poly)
        if len(poly) != self.s or any(not 0 <= c < self.p for c in poly):
            raise ParameterError(
                f"reduction polynomial needs exactly {self.s} coefficients in [0, {self.p})"
            )
        object.__setattr__(self, "reduction_poly", poly)
        if not is_irreducible(self.p, poly):
            raise ParameterError(
                f"x^{self.s} + {list(poly)} is reducible over GF({self.p})"
            )

    @classmethod
    def create(cls, p: int, s: int, reduction_poly=None) -> "FieldParams":
        """Build params, choosing the default reduction polynomial if none given."""
        if reduction_poly is None:
            if not isinstance(p, int) or not _is_prime(p):
                raise ParameterError(f"p must be a prime integer, got {p!r}")
            if not isinstance(s, int) or s < 1:
                raise ParameterError(f"s must be an integer >= 1, got {s!r}")
            reduction_poly = default_reduction_poly(p, s)
        return cls(p, s, tuple(reduction_poly))

    @property
    def order(self) -> int:
        return self.p**self.s

    def elements(self) -> tuple["GFElem", ...]:
        """All field elements in lexicographic digit order, zero first."""
        return _elements(self)

    def zero(self) -> "GFElem":
        return _elements(self)[0]

    def one(self) -> "GFElem":
        return self.elem(1, *([0] * (self.s - 1)))

    def elem(self, *digits: int) -> "GFElem":
        return _interned(self, tuple(int(d) for d in digits))

    def from_digits(self, digits) -> "GFElem":
        return _interned(self, tuple(int(d) for d in digits))

    def to_json_dict(self) -> dict:
        return {"p": self.p, "s": self.s, "poly": list(self.reduction_poly)}

    @classmethod
    def from_json_dict(cls, d: dict) -> "FieldParams":
        return cls.create(d["p"], d["s"], d.get("poly"))


@dataclass(frozen=True)
class GFElem:
    """One element of GF(p^s): s digits, each in [0, p)."""

    params: FieldParams
    digits: tuple[int, ...]

    def __post_init__(self):
        digits = tuple(int(d) for d in self.digits)
        if len(digits) != self.params.s:
            raise ParameterError(
                f"expected {self.params.s} digits, got {len(digits)}"
            )
        if any(not 0 <= d < self.params.p for d in digits):
            raise ParameterError(f"digits out of range [0, {self.params.p}): {digits}")
        object.__setattr__(self, "digits", digits)

    def is_zero(self) -> bool:
        return not any(self.digits)

    def __add__(self, other: "GFElem") -> "GFElem":
        return gf_add(self, other)

    def __sub__(self, other: "GFElem") -> "GFElem":
        return gf_sub(self, other)

    def __mul__(self, other: "GFElem") -> "GFElem":
        return gf_mul(self, other)

    def __neg__(self) -> "GFElem":
        return gf_neg(self)

    def __repr__(self) -> str:
        return f"GFElem{self.digits}"


@functools.lru_cache(maxsize=None)
def _elements(params: FieldParams) -> tuple[GFElem, ...]:
    return tuple(
        GFElem(params, digits)
        for digits in itertools.product(range(params.p), repeat=params.s)
    )


@functools.lru_cache(maxsize=None)
def _digit_map(params: FieldParams) -> dict[tuple[int, ...], GFElem]:
    return {e.digits: e for e in _elements(params)}


def _interned(params: FieldParams, digits: tuple[int, ...]) -> GFElem:
    e = _digit_map(params).get(digits)
    if e is None:
        return GFElem(params, digits)  # raises ParameterError on bad digits
    return e


def _require_same(a: GFElem, b: GFElem) -> None:
    if a.params != b.params:
        raise ParameterError("operands belong to different fields")


def gf_add(a: GFElem, b: GFElem) -> GFElem:
    """Digitwise sum mod p."""
    _require_same(a, b)
    p = a.params.p
    return _interned(a.params, tuple((x + y) % p for x, y in zip(a.digits, b.digits)))


def gf_neg(a: GFElem) -> GFElem:
    p = a.params.p
    return _interned(a.params, tuple((-x) % p for x in a.digits))


def gf_sub(a: GFElem, b: GFElem) -> GFElem:
    _require_same(a, b)
    p = a.params.p
    return _interned(a.params, tuple((x - y) % p for x, y in zip(a.digits, b.digits)))


def gf_mul(a: GFElem, b: GFElem) -> GFElem:
    """Polynomial product reduced modulo the field's reduction polynomial."""
    _require_same(a, b)
    p, s = a.params.p, a.params.s
    conv = [0] * (2 * s - 1)
    for i, x in enumerate(a.digits):
        if x:
            for j, y in enumerate(b.digits):
                conv[i + j] = (conv[i + j] + x * y) % p
    poly = a.params.reduction_poly
    for k in range(2 * s - 2, s - 1, -1):
        c = conv[k]
        if c:
            conv[k] = 0
            for i in range(s):
                conv[k - s + i] = (conv[k - s + i] - c * poly[i]) % p
    return _interned(a.params, tuple(conv[:s]))


def gf_modulus(a: GFElem) -> int:
    """1 for nonzero elements, 0 for the zero element."""
    return 0 if a.is_zero() else 1


def gf_enumerate(params: FieldParams) -> list[GFElem]:
    """All p^s elements exactly once, lexicographic digit order, zero first."""
    return list(_elements(params))


def gf_index(a: GFElem) -> int:
    """Position of ``a`` in the enumeration order (first digit most significant)."""
    p = a.params.p
    idx = 0
    for d in a.digits:
        idx = idx * p + d
    return idx


def gf_from_index(params: FieldParams, idx: int) -> GFElem:
    return _elements(params)[idx]
