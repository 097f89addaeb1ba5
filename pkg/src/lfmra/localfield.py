"""Truncated elements of the Laurent-series field over GF(p^s).

A value stores a finite digit window starting at index ``lo``; digits
outside the window are implicitly zero.  Stored windows are canonical
(first and last stored digits nonzero, the zero element stores an empty
window at lo = 0), so structural equality and hashing agree with
equality of the underlying series.  Index n carries weight t^n: small
indices are the "large" coefficients, and the norm of an element whose
first nonzero digit sits at index n is (1/p^s)^n.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParameterError
from .galois import FieldParams, GFElem, gf_add, gf_mul, gf_neg

__all__ = [
    "LaurentElem",
    "ShiftSet",
    "lf_zero",
    "lf_add",
    "lf_sub",
    "lf_neg",
    "lf_mul",
    "scalar_mul",
    "lf_norm",
    "dilate",
    "basis_vector",
    "shift_set",
]


@dataclass(frozen=True)
class LaurentElem:
    """Finite digit window of GFElems with an index offset."""

    params: FieldParams
    lo: int
    digits: tuple[GFElem, ...]

    def __post_init__(self):
        digits = tuple(self.digits)
        for d in digits:
            if d.params != self.params:
                raise ParameterError("digit from a different field")
        lo = self.lo
        start = 0
        end = len(digits)
        while start < end and digits[start].is_zero():
            start += 1
        while end > start and digits[end - 1].is_zero():
            end -= 1
        if start == end:
            lo, digits = 0, ()
        else:
            lo, digits = lo + start, digits[start:end]
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "digits", digits)

    @property
    def hi(self) -> int:
        """One past the last stored index."""
        return self.lo + len(self.digits)

    def is_zero(self) -> bool:
        return not self.digits

    def digit(self, i: int) -> GFElem:
        """Digit at index i, zero outside the stored window."""
        if self.lo <= i < self.hi:
            return self.digits[i - self.lo]
        return self.params.zero()

    def __repr__(self) -> str:
        if self.is_zero():
            return "LaurentElem(0)"
        inner = ", ".join(f"{d.digits}@{self.lo + i}" for i, d in enumerate(self.digits))
        return f"LaurentElem({inner})"

    def to_json_dict(self) -> dict:
        return {"lo": self.lo, "digits": [list(d.digits) for d in self.digits]}

    @classmethod
    def from_json_dict(cls, params: FieldParams, d: dict) -> "LaurentElem":
        return cls(params, int(d["lo"]), tuple(params.from_digits(x) for x in d["digits"]))


def lf_zero(params: FieldParams) -> LaurentElem:
    return LaurentElem(params, 0, ())


def _require_same(a: LaurentElem, b: LaurentElem) -> None:
    if a.params != b.params:
        raise ParameterError("operands belong to different fields")


def lf_add(a: LaurentElem, b: LaurentElem) -> LaurentElem:
    """Digitwise sum over the union window."""
    _require_same(a, b)
    if a.is_zero():
        return b
    if b.is_zero():
        return a
    lo = min(a.lo, b.lo)
    hi = max(a.hi, b.hi)
    return LaurentElem(a.params, lo, tuple(gf_add(a.digit(i), b.digit(i)) for i in range(lo, hi)))


def lf_neg(a: LaurentElem) -> LaurentElem:
    return LaurentElem(a.params, a.lo, tuple(gf_neg(d) for d in a.digits))


def lf_sub(a: LaurentElem, b: LaurentElem) -> LaurentElem:
    return lf_add(a, lf_neg(b))


def lf_mul(a: LaurentElem, b: LaurentElem) -> LaurentElem:
    """Convolution over index sums: (ab)_l = sum over i+j=l of a_i b_j."""
    _require_same(a, b)
    if a.is_zero() or b.is_zero():
        return lf_zero(a.params)
    lo = a.lo + b.lo
    out = [a.params.zero()] * (len(a.digits) + len(b.digits) - 1)
    for i, x in enumerate(a.digits):
        if x.is_zero():
            continue
        for j, y in enumerate(b.digits):
            out[i + j] = gf_add(out[i + j], gf_mul(x, y))
    return LaurentElem(a.params, lo, tuple(out))


def scalar_mul(lam: GFElem, a: LaurentElem) -> LaurentElem:
    """Coordinatewise multiplication by a field scalar."""
    if lam.params != a.params:
        raise ParameterError("scalar belongs to a different field")
    return LaurentElem(a.params, a.lo, tuple(gf_mul(lam, d) for d in a.digits))


def lf_norm(a: LaurentElem) -> Fraction:
    """(1/p^s)^n for the first nonzero digit index n; 0 for the zero element."""
    if a.is_zero():
        return Fraction(0)
    return Fraction(1, a.params.order) ** a.lo


def dilate(x: LaurentElem, times: int = 1) -> LaurentElem:
    """Shift every digit index down by ``times`` (the expanding map for times=1)."""
    if x.is_zero():
        return x
    return LaurentElem(x.params, x.lo - times, x.digits)


def basis_vector(params: FieldParams, k: int) -> LaurentElem:
    """The element with single digit (1, 0, ..., 0) at index k."""
    return LaurentElem(params, k, (params.one(),))


@dataclass(frozen=True)
class ShiftSet:
    """All shifts with digits confined to indices -k..-1."""

    params: FieldParams
    k: int
    elements: tuple[LaurentElem, ...]


def shift_set(params: FieldParams, k: int) -> ShiftSet:
    """Every combination of digits at indices -k..-1, zero shift first.

    Enumeration is lexicographic over the digit window read from index
    -k upward, the digit at index -1 varying fastest.
    """
    if k < 1:
        raise ParameterError(f"shift depth must be >= 1, got {k}")
    elems = params.elements()
    members = tuple(
        LaurentElem(params, -k, digits)
        for digits in itertools.product(elems, repeat=k)
    )
    return ShiftSet(params, k, members)
