"""Characters of the additive group as finite exponent windows.

The elementary character with exponent u at index k sends x to
exp(2*pi*i/p * sum_l u^(l) x_k^(l)), depending on the single digit x_k.
A general character is a finite product of such factors, stored as a
window of exponent GFElems.  Every value is a p-th root of unity; the
integer exponent is computed exactly and converted to a complex number
only in ``char_eval``.

The dilation that shifts digits from index n to n-1 acts on characters
by moving the exponent at index k to index k+1, so that pairing a
dilated character with x equals pairing the original with dilated x.
"""

from __future__ import annotations

import cmath
import functools
from dataclasses import dataclass

from .errors import ParameterError, WindowOverflowError
from .galois import FieldParams, GFElem, gf_add, gf_mul, gf_neg
from .localfield import LaurentElem

__all__ = [
    "CharacterWindow",
    "trivial_character",
    "rademacher",
    "char_eval",
    "char_eval_exponent",
    "char_mul",
    "char_inv",
    "char_pow",
    "char_dilate",
    "annihilator_contains",
    "root_of_unity",
]


@dataclass(frozen=True)
class CharacterWindow:
    """Exponent window: exponent of the index-k factor for k in [lo, lo+len)."""

    params: FieldParams
    lo: int
    exponents: tuple[GFElem, ...]

    def __post_init__(self):
        exps = tuple(self.exponents)
        for e in exps:
            if e.params != self.params:
                raise ParameterError("exponent from a different field")
        lo = self.lo
        start = 0
        end = len(exps)
        while start < end and exps[start].is_zero():
            start += 1
        while end > start and exps[end - 1].is_zero():
            end -= 1
        if start == end:
            lo, exps = 0, ()
        else:
            lo, exps = lo + start, exps[start:end]
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "exponents", exps)

    @property
    def hi(self) -> int:
        return self.lo + len(self.exponents)

    def is_trivial(self) -> bool:
        return not self.exponents

    def exponent(self, k: int) -> GFElem:
        if self.lo <= k < self.hi:
            return self.exponents[k - self.lo]
        return self.params.zero()

    def to_json_dict(self) -> dict:
        return {"lo": self.lo, "exponents": [list(e.digits) for e in self.exponents]}

    @classmethod
    def from_json_dict(cls, params: FieldParams, d: dict) -> "CharacterWindow":
        return cls(params, int(d["lo"]), tuple(params.from_digits(x) for x in d["exponents"]))


def trivial_character(params: FieldParams) -> CharacterWindow:
    return CharacterWindow(params, 0, ())


def rademacher(params: FieldParams, k: int, u: GFElem | None = None) -> CharacterWindow:
    """The index-k elementary character, raised to exponent u (default (1,0,...,0))."""
    if u is None:
        u = params.one()
    return CharacterWindow(params, k, (u,))


@functools.lru_cache(maxsize=None)
def _roots(p: int) -> tuple[complex, ...]:
    out = [complex(1)]
    for k in range(1, p):
        # exact where floating point can be: the half turn is exactly -1
        out.append(complex(-1) if 2 * k == p else cmath.exp(2j * cmath.pi * k / p))
    return tuple(out)


def root_of_unity(p: int, k: int) -> complex:
    return _roots(p)[k % p]


def char_eval_exponent(chi: CharacterWindow, x: LaurentElem) -> int:
    """The integer e mod p with chi(x) = exp(2*pi*i*e/p).  Exact."""
    if chi.params != x.params:
        raise ParameterError("character and point from different fields")
    p = chi.params.p
    total = 0
    for k in range(max(chi.lo, x.lo), min(chi.hi, x.hi)):
        u = chi.exponent(k).digits
        d = x.digit(k).digits
        total += sum(ui * di for ui, di in zip(u, d))
    return total % p


def char_eval(chi: CharacterWindow, x: LaurentElem) -> complex:
    return root_of_unity(chi.params.p, char_eval_exponent(chi, x))


def char_mul(chi: CharacterWindow, phi: CharacterWindow) -> CharacterWindow:
    """Exponentwise sum; evaluates to the pointwise product of values."""
    if chi.params != phi.params:
        raise ParameterError("characters from different fields")
    if chi.is_trivial():
        return phi
    if phi.is_trivial():
        return chi
    lo = min(chi.lo, phi.lo)
    hi = max(chi.hi, phi.hi)
    return CharacterWindow(
        chi.params, lo, tuple(gf_add(chi.exponent(k), phi.exponent(k)) for k in range(lo, hi))
    )


def char_inv(chi: CharacterWindow) -> CharacterWindow:
    return CharacterWindow(chi.params, chi.lo, tuple(gf_neg(e) for e in chi.exponents))


def char_pow(chi: CharacterWindow, b: GFElem) -> CharacterWindow:
    """Raise to a field-scalar power: every exponent multiplied by b."""
    if chi.params != b.params:
        raise ParameterError("scalar from a different field")
    return CharacterWindow(chi.params, chi.lo, tuple(gf_mul(e, b) for e in chi.exponents))


def char_dilate(
    chi: CharacterWindow,
    times: int = 1,
    bounds: tuple[int, int] | None = None,
) -> CharacterWindow:
    """Adjoint dilation: exponent at index k moves to index k + times.

    Negative ``times`` applies the inverse.  When ``bounds = (lo, hi)``
    is given, a nonzero result whose support leaves [lo, hi) raises
    WindowOverflowError.
    """
    if chi.is_trivial():
        return chi
    out = CharacterWindow(chi.params, chi.lo + times, chi.exponents)
    if bounds is not None and (out.lo < bounds[0] or out.hi > bounds[1]):
        raise WindowOverflowError(
            f"exponent window [{out.lo}, {out.hi}) leaves bounds [{bounds[0]}, {bounds[1]})"
        )
    return out


def annihilator_contains(n: int, chi: CharacterWindow) -> bool:
    """Whether chi is identically 1 on the ball of elements supported at indices >= n.

    Equivalent to all exponents at indices >= n being zero; windows are
    canonical, so this is a bound check on the stored support.
    """
    return chi.is_trivial() or chi.hi <= n
