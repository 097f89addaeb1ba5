"""Step scaling functions built from a mask-square table, and their checks.

Frequency side: a function on exponent windows (u_{-N}, ..., u_{M-1}),
constant on cosets of the depth-N annihilator and supported where all
exponents at indices >= M vanish.  The builder multiplies mask values
over the N+1 sliding windows of the zero-padded exponent string, so the
squared table is a product of mask squares and stays exact whenever the
mask squares are rational.

Time side: a function on coset representatives with digits at indices
-N..M-1.  The measure convention takes the unit ball to have mass 1, so
the depth-M subgroup has mass p^(-sM) and inner products of step
functions are that mass times a plain sum over representatives.

Transforms pair exponent tuples with digit tuples through the diagonal
bicharacter sum(u_k . x_k) mod p; they factor into base-p axes, giving a
fast butterfly with an O(n^2) direct-summation oracle kept alongside for
verification.  For p = 2 with rational inputs everything stays in exact
rational arithmetic; otherwise values are complex floats.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ParameterError
from .galois import FieldParams, GFElem, gf_index, gf_sub
from .localfield import LaurentElem
from .maskdyn import LambdaArray, Number, _key_json, _value_to_json
from .validtree import Window, window_sort_key

__all__ = [
    "MaskFunction",
    "FreqStepFunction",
    "TimeStepFunction",
    "RefinementCoeffs",
    "FreqOrthoReport",
    "TimeOrthoReport",
    "RefinementReport",
    "mask_from_lambda",
    "build_phi_hat",
    "check_orthonormality_freq",
    "orthonormality_sums_nested",
    "check_limit_condition",
    "inverse_transform",
    "inverse_transform_direct",
    "forward_transform",
    "check_orthonormality_time",
    "l2_norm_sq",
    "refinement_coeffs",
    "reconstruct_mask",
    "check_refinement",
]

FREQ_TOL = 1e-12
TIME_TOL = 1e-9

_NUMPY_THRESHOLD = 512  # below this, plain dict loops are fast enough


def _keys(params: FieldParams, width: int):
    return itertools.product(params.elements(), repeat=width)


def _sqrt_value(v: Number) -> tuple[Number, bool]:
    """Nonnegative square root, exact when the input is a rational square."""
    if isinstance(v, Fraction):
        if v < 0:
            raise ParameterError(f"cannot take a real square root of {v}")
        rn = math.isqrt(v.numerator)
        rd = math.isqrt(v.denominator)
        if rn * rn == v.numerator and rd * rd == v.denominator:
            return Fraction(rn, rd), True
        return math.sqrt(float(v)), False
    if v < 0:
        raise ParameterError(f"cannot take a real square root of {v}")
    return math.sqrt(v), False


def _as_complex(v) -> complex:
    return v if isinstance(v, complex) else complex(float(v))


def _dot_mod_p(u: tuple[GFElem, ...], x: tuple[GFElem, ...], p: int) -> int:
    total = 0
    for ue, xe in zip(u, x):
        total += sum(a * b for a, b in zip(ue.digits, xe.digits))
    return total % p


def _chrestenson_nd(arr: np.ndarray, p: int, axes: int, sign: int) -> np.ndarray:
    """Unnormalized transform with kernel omega^(sign*u*x) on every base-p axis."""
    a = np.asarray(arr, dtype=complex).reshape((p,) * axes)
    grid = np.outer(np.arange(p), np.arange(p))
    kernel = np.exp(sign * 2j * np.pi / p * grid)
    for ax in range(axes):
        a = np.moveaxis(np.tensordot(kernel, a, axes=(1, ax)), 0, ax)
    return a.reshape(-1)


def _walsh_exact(vals: list[Fraction], axes: int) -> list[Fraction]:
    """Unnormalized Walsh transform over Z_2^axes in exact rationals."""
    a = list(vals)
    n = 1 << axes
    if len(a) != n:
        raise ParameterError("length mismatch in exact transform")
    h = 1
    while h < n:
        for i in range(0, n, 2 * h):
            for j in range(i, i + h):
                x, y = a[j], a[j + h]
                a[j], a[j + h] = x + y, x - y
        h *= 2
    return a


def _sub_perm(params: FieldParams, h: GFElem) -> list[int]:
    """Index permutation a -> index(a - h) over the field enumeration."""
    return [gf_index(gf_sub(e, h)) for e in params.elements()]


def _complex_json(v) -> dict:
    """re/im fields for any value; exact values also carry a fraction string."""
    if isinstance(v, Fraction):
        return {"value": _value_to_json(v), "re": float(v), "im": 0.0}
    if isinstance(v, complex):
        return {"re": float(v.real), "im": float(v.imag)}
    return {"re": float(v), "im": 0.0}


@dataclass
class MaskFunction:
    """Mask values on (N+1)-windows together with their exact squares."""

    params: FieldParams
    N: int
    values: dict[tuple[GFElem, ...], Number]
    squares: dict[tuple[GFElem, ...], Number]
    squares_exact: bool
    values_exact: bool


def mask_from_lambda(lam: LambdaArray, phase: str = "nonnegative_root") -> MaskFunction:
    """Mask from its squared modulus; the only supported phase is the real root."""
    if phase != "nonnegative_root":
        raise ParameterError(f"unsupported phase strategy {phase!r}")
    values: dict[tuple[GFElem, ...], Number] = {}
    all_exact = True
    for key, sq in lam.table.items():
        v, ex = _sqrt_value(sq)
        values[key] = v
        all_exact = all_exact and ex
    if not all_exact:
        values = {k: float(v) for k, v in values.items()}
    return MaskFunction(lam.params, lam.N, values, dict(lam.table), lam.exact, all_exact)


@dataclass
class FreqStepFunction:
    """Frequency-side step function on exponent tuples (u_{-N}, ..., u_{M-1})."""

    params: FieldParams
    N: int
    M: int
    values: dict[tuple[GFElem, ...], Number]
    squares: dict[tuple[GFElem, ...], Number]
    squares_exact: bool
    values_exact: bool

    def zero_key(self) -> tuple[GFElem, ...]:
        return (self.params.zero(),) * (self.N + self.M)

    def to_json_list(self) -> list:
        out = []
        for k in sorted(self.values, key=window_sort_key):
            rec = {"window": _key_json(k)}
            rec.update(_complex_json(self.values[k]))
            out.append(rec)
        return out


def build_phi_hat(m0: MaskFunction, M: int) -> FreqStepFunction:
    """Product of mask values over the N+1 sliding windows of the padded tuple.

    The window at offset j covers padded positions j..j+N, where the
    tuple is extended by N trailing zeros; every later window is all
    zero and contributes the factor 1.
    """
    if M < 0:
        raise ParameterError(f"constancy level M must be >= 0, got {M}")
    params, n = m0.params, m0.N
    zero = params.zero()
    values: dict[tuple[GFElem, ...], Number] = {}
    squares: dict[tuple[GFElem, ...], Number] = {}
    one_v: Number = Fraction(1) if m0.values_exact else 1.0
    one_s: Number = Fraction(1) if m0.squares_exact else 1.0
    for key in _keys(params, n + M):
        padded = key + (zero,) * n
        v = one_v
        sq = one_s
        for j in range(M + n):
            w = padded[j : j + n + 1]
            v *= m0.values[w]
            sq *= m0.squares[w]
        values[key] = v
        squares[key] = sq
    return FreqStepFunction(params, n, M, values, squares, m0.squares_exact, m0.values_exact)


@dataclass
class FreqOrthoReport:
    """Per-prefix sums of squared moduli over all suffixes."""

    sums: dict[Window, Number]
    tol: float
    passed: bool

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "tol": self.tol,
            "sums": [
                {"prefix": _key_json(k), "value": _value_to_json(self.sums[k])}
                for k in sorted(self.sums, key=window_sort_key)
            ],
        }


def check_orthonormality_freq(phi: FreqStepFunction, tol: float | None = None) -> FreqOrthoReport:
    """Shift orthonormality on the frequency side: every prefix sum equals 1."""
    params = phi.params
    exact = phi.squares_exact
    use_tol = (0.0 if exact else FREQ_TOL) if tol is None else tol
    sums: dict[Window, Number] = {}
    for prefix in _keys(params, phi.N):
        acc: Number = Fraction(0) if exact else 0.0
        for suffix in _keys(params, phi.M):
            acc += phi.squares[prefix + suffix]
        sums[prefix] = acc
    passed = all(abs(v - 1) <= use_tol for v in sums.values())
    return FreqOrthoReport(sums, use_tol, passed)


def orthonormality_sums_nested(lam: LambdaArray, M: int) -> dict[Window, Number]:
    """The same prefix sums via the literal nested sum-product expansion.

    Kept independent of both the product table and the array dynamics so
    it can serve as an oracle: sums over each appended digit alternate
    with single mask-square factors, closing with the zero-padded tail
    product.
    """
    params, n = lam.params, lam.N
    elems = params.elements()
    zero = params.zero()

    def tail(w: Window) -> Number:
        acc: Number = Fraction(1) if lam.exact else 1.0
        for t in range(n):
            acc *= lam.table[w[t:] + (zero,) * (t + 1)]
        return acc

    def rec(w: Window, remaining: int) -> Number:
        if remaining == 0:
            return tail(w)
        total: Number = Fraction(0) if lam.exact else 0.0
        for e in elems:
            lv = lam.table[w + (e,)]
            if lv:
                total += lv * rec(w[1:] + (e,), remaining - 1)
        return total

    return {prefix: rec(prefix, M) for prefix in _keys(params, n)}


def check_limit_condition(phi: FreqStepFunction) -> bool:
    """At step resolution: modulus 1 on the all-zero exponent window."""
    sq = phi.squares[phi.zero_key()]
    if phi.squares_exact:
        return sq == 1
    return abs(sq - 1) <= FREQ_TOL


@dataclass
class TimeStepFunction:
    """Time-side step function on coset representatives (x_{-N}, ..., x_{M-1})."""

    params: FieldParams
    N: int
    M: int
    values: dict[tuple[GFElem, ...], Fraction | complex]
    exact: bool

    def to_json_list(self) -> list:
        out = []
        for k in sorted(self.values, key=window_sort_key):
            rec = {"window": _key_json(k)}
            rec.update(_complex_json(self.values[k]))
            out.append(rec)
        return out


def _exact_time_capable(phi: FreqStepFunction) -> bool:
    return phi.params.p == 2 and phi.values_exact


def _dict_to_array(values: dict, params: FieldParams, width: int) -> np.ndarray:
    arr = np.empty(params.order**width, dtype=complex)
    for i, key in enumerate(_keys(params, width)):
        arr[i] = _as_complex(values[key])
    return arr


def _array_to_dict(arr: np.ndarray, params: FieldParams, width: int) -> dict:
    return {key: complex(arr[i]) for i, key in enumerate(_keys(params, width))}


def inverse_transform(phi: FreqStepFunction) -> TimeStepFunction:
    """Synthesis with kernel omega^(+<u,x>) and weight p^(-sN) per exponent coset.

    The normalization makes forward_transform an exact left inverse and
    gives the unit ball indicator for the constant-1 frequency table.
    """
    params = phi.params
    width = phi.N + phi.M
    axes = params.s * width
    if _exact_time_capable(phi):
        vals = [phi.values[k] for k in _keys(params, width)]
        out = _walsh_exact([Fraction(v) for v in vals], axes)
        scale = Fraction(1, params.order**phi.N)
        table = {k: scale * v for k, v in zip(_keys(params, width), out)}
        return TimeStepFunction(params, phi.N, phi.M, table, True)
    arr = _dict_to_array(phi.values, params, width)
    out = _chrestenson_nd(arr, params.p, axes, +1) / params.order**phi.N
    return TimeStepFunction(params, phi.N, phi.M, _array_to_dict(out, params, width), False)


def inverse_transform_direct(phi: FreqStepFunction) -> TimeStepFunction:
    """O(n^2) summation oracle for inverse_transform (always complex)."""
    params = phi.params
    p = params.p
    width = phi.N + phi.M
    roots = [np.exp(2j * np.pi * k / p) for k in range(p)]
    scale = 1.0 / params.order**phi.N
    keys = list(_keys(params, width))
    vals = [_as_complex(phi.values[u]) for u in keys]
    table = {}
    for x in keys:
        acc = 0j
        for u, v in zip(keys, vals):
            acc += v * roots[_dot_mod_p(u, x, p)]
        table[x] = scale * acc
    return TimeStepFunction(params, phi.N, phi.M, table, False)


def forward_transform(fn: TimeStepFunction) -> FreqStepFunction:
    """Analysis with kernel omega^(-<u,x>) and weight p^(-sM) per digit coset."""
    params = fn.params
    width = fn.N + fn.M
    axes = params.s * width
    if fn.exact and params.p == 2:
        vals = [Fraction(fn.values[k]) for k in _keys(params, width)]
        out = _walsh_exact(vals, axes)
        scale = Fraction(1, params.order**fn.M)
        values = {k: scale * v for k, v in zip(_keys(params, width), out)}
        squares = {k: v * v for k, v in values.items()}
        return FreqStepFunction(params, fn.N, fn.M, values, squares, True, True)
    arr = _dict_to_array(fn.values, params, width)
    out = _chrestenson_nd(arr, params.p, axes, -1) / params.order**fn.M
    values = _array_to_dict(out, params, width)
    squares = {k: abs(v) ** 2 for k, v in values.items()}
    return FreqStepFunction(params, fn.N, fn.M, values, squares, False, False)


@dataclass
class TimeOrthoReport:
    """Inner products of the function against its lattice shifts."""

    inner: dict[LaurentElem, Fraction | complex]
    norm_sq: Fraction | float
    tol: float
    passed: bool

    def to_json_dict(self) -> dict:
        recs = []
        for h in sorted(self.inner, key=lambda e: (e.lo, tuple(d.digits for d in e.digits))):
            rec = {"shift": h.to_json_dict()}
            rec.update(_complex_json(self.inner[h]))
            recs.append(rec)
        return {
            "passed": self.passed,
            "tol": self.tol,
            "norm_sq": _value_to_json(self.norm_sq)
            if isinstance(self.norm_sq, Fraction)
            else float(self.norm_sq),
            "inner": recs,
        }


def check_orthonormality_time(fn: TimeStepFunction, tol: float | None = None) -> TimeOrthoReport:
    """Inner products against every shift with digits at indices -N..-1.

    Shifts outside that window meet the support only trivially, so this
    finite family decides orthonormality of the full shift system.
    """
    params = fn.params
    width = fn.N + fn.M
    measure = Fraction(1, params.order**fn.M)
    use_tol = (0.0 if fn.exact else TIME_TOL) if tol is None else tol
    inner: dict[LaurentElem, Fraction | complex] = {}

    if fn.exact:
        keys = list(_keys(params, width))
        for h in _keys(params, fn.N):
            acc = Fraction(0)
            for x in keys:
                shifted = tuple(gf_sub(x[i], h[i]) for i in range(fn.N)) + x[fn.N :]
                acc += Fraction(fn.values[x]) * Fraction(fn.values[shifted])
            inner[LaurentElem(params, -fn.N, h)] = measure * acc
    else:
        arr = _dict_to_array(fn.values, params, width)
        shaped = arr.reshape((params.order,) * width)
        perms = {e: np.asarray(_sub_perm(params, e)) for e in params.elements()}
        for h in _keys(params, fn.N):
            shifted = shaped
            for ax, he in enumerate(h):
                if not he.is_zero():
                    shifted = np.take(shifted, perms[he], axis=ax)
            val = complex(np.sum(shaped * np.conj(shifted))) * float(measure)
            inner[LaurentElem(params, -fn.N, h)] = val

    zero_shift = LaurentElem(params, 0, ())
    norm_sq = inner[zero_shift]
    ok = True
    for h, v in inner.items():
        target = 1 if h.is_zero() else 0
        if abs(v - target) > use_tol:
            ok = False
    if isinstance(norm_sq, complex):
        norm_out: Fraction | float = norm_sq.real
    else:
        norm_out = norm_sq
    return TimeOrthoReport(inner, norm_out, use_tol, ok)


def l2_norm_sq(fn: TimeStepFunction) -> Fraction | float:
    """Measure of a depth-M coset times the sum of squared moduli."""
    measure = Fraction(1, fn.params.order**fn.M)
    if fn.exact:
        return measure * sum(Fraction(v) ** 2 for v in fn.values.values())
    return float(measure) * float(sum(abs(v) ** 2 for v in fn.values.values()))


@dataclass
class RefinementCoeffs:
    """Coefficients of the two-scale relation, keyed by lattice shifts."""

    params: FieldParams
    N: int
    coeffs: dict[LaurentElem, Fraction | complex]
    exact: bool
    normalization: Fraction  # the constant in front of the reconstruction sum

    def table(self) -> dict[tuple[GFElem, ...], Fraction | complex]:
        """Coefficients re-keyed by digit tuples at indices -(N+1)..-1."""
        out = {}
        for h, v in self.coeffs.items():
            key = tuple(h.digit(i) for i in range(-(self.N + 1), 0))
            out[key] = v
        return out

    def to_json_list(self) -> list:
        def shift_key(e: LaurentElem):
            return tuple(e.digit(i).digits for i in range(-(self.N + 1), 0))

        out = []
        for h in sorted(self.coeffs, key=shift_key):
            rec = {"h": h.to_json_dict()}
            rec.update(_complex_json(self.coeffs[h]))
            out.append(rec)
        return out


def refinement_coeffs(m0: MaskFunction) -> RefinementCoeffs:
    """Invert the mask's shift expansion over the depth-(N+1) lattice.

    The reconstruction constant is 1/p^s: pairing each of the p^(s(N+1))
    exponent windows with each lattice shift and requiring the round
    trip to reproduce the mask forces it, and it matches a change of
    variables in the two-scale relation.  (For s = 1 this is the usual
    1/p.)
    """
    params, n = m0.params, m0.N
    width = n + 1
    axes = params.s * width
    keys = list(_keys(params, width))
    exact = params.p == 2 and m0.values_exact
    if exact:
        vals = [Fraction(m0.values[k]) for k in keys]
        out = _walsh_exact(vals, axes)
        scale = Fraction(1, params.order**n)
        coeffs = {
            LaurentElem(params, -width, h): scale * v for h, v in zip(keys, out)
        }
    else:
        arr = _dict_to_array(m0.values, params, width)
        out = _chrestenson_nd(arr, params.p, axes, +1) / params.order**n
        coeffs = {
            LaurentElem(params, -width, h): complex(v) for h, v in zip(keys, out)
        }
    return RefinementCoeffs(params, n, coeffs, exact, Fraction(1, params.order))


def reconstruct_mask(beta: RefinementCoeffs) -> dict[tuple[GFElem, ...], Fraction | complex]:
    """Apply the shift expansion to the coefficients; a round-trip check."""
    params, n = beta.params, beta.N
    width = n + 1
    axes = params.s * width
    keys = list(_keys(params, width))
    table = beta.table()
    if beta.exact:
        vals = [Fraction(table[k]) for k in keys]
        out = _walsh_exact(vals, axes)
        return {u: beta.normalization * v for u, v in zip(keys, out)}
    arr = _dict_to_array(table, params, width)
    out = _chrestenson_nd(arr, params.p, axes, -1) * float(beta.normalization)
    return {u: complex(v) for u, v in zip(keys, out)}


@dataclass
class RefinementReport:
    """Residuals of the two-scale relation in both domains."""

    time_residual: float
    freq_residual: float
    time_tol: float
    freq_tol: float
    passed: bool
    exact: bool = False

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "time_residual": self.time_residual,
            "freq_residual": self.freq_residual,
            "time_tol": self.time_tol,
            "freq_tol": self.freq_tol,
            "exact": self.exact,
        }


def _refine_rhs_exact(
    fn: TimeStepFunction, table: dict, params: FieldParams, n: int, m: int
) -> dict:
    zero = params.zero()
    support = [(h, v) for h, v in table.items() if v]
    rhs = {}
    for x in _keys(params, n + m):
        acc = Fraction(0)
        for h, bv in support:
            if x[0] != h[0]:
                continue
            arg = []
            for i in range(n + m):
                xv = x[i + 1] if i + 1 < n + m else zero
                if i < n:
                    xv = gf_sub(xv, h[i + 1])
                arg.append(xv)
            acc += Fraction(bv) * Fraction(fn.values[tuple(arg)])
        rhs[x] = acc
    return rhs


def _refine_rhs_float(
    fn: TimeStepFunction, table: dict, params: FieldParams, n: int, m: int
) -> dict:
    zero = params.zero()
    order = params.order
    width = n + m
    arr = _dict_to_array(fn.values, params, width).reshape((order,) * width)
    perms = {e: np.asarray(_sub_perm(params, e)) for e in params.elements()}
    rhs = np.zeros((order,) * width, dtype=complex)
    for h, bv in table.items():
        if not bv:
            continue
        if m >= 1:
            base = np.take(arr, gf_index(zero), axis=width - 1)
        else:
            base = np.take(arr, gf_index(gf_sub(zero, h[n])), axis=width - 1)
        for ax in range(min(n, width - 1)):
            he = h[ax + 1]
            if not he.is_zero():
                base = np.take(base, perms[he], axis=ax)
        rhs[gf_index(h[0])] += _as_complex(bv) * base
    return _array_to_dict(rhs.reshape(-1), params, width)


def check_refinement(
    fn: TimeStepFunction,
    beta: RefinementCoeffs,
    m0: MaskFunction,
    phi: FreqStepFunction,
) -> RefinementReport:
    """Verify the two-scale relation on every representative and window.

    Time side: the function must equal the coefficient-weighted sum of
    its dilated shifts; dilation pushes the representative's digits one
    index down, and any mass falling below index -N lies outside the
    support and contributes nothing.  Frequency side: each table value
    must factor through the mask times the down-shifted table value.
    """
    params, n, m = fn.params, fn.N, fn.M
    table = beta.table()
    exact = fn.exact and beta.exact and phi.values_exact and m0.values_exact

    if exact:
        rhs = _refine_rhs_exact(fn, table, params, n, m)
        time_res_exact = max(abs(Fraction(fn.values[x]) - rhs[x]) for x in rhs)
        time_residual = float(time_res_exact)
        time_zero = time_res_exact == 0
    else:
        if params.order ** (n + m) >= _NUMPY_THRESHOLD:
            rhs = _refine_rhs_float(fn, table, params, n, m)
        else:
            zero = params.zero()
            support = [(h, v) for h, v in table.items() if v]
            rhs = {}
            for x in _keys(params, n + m):
                acc = 0j
                for h, bv in support:
                    if x[0] != h[0]:
                        continue
                    arg = []
                    for i in range(n + m):
                        xv = x[i + 1] if i + 1 < n + m else zero
                        if i < n:
                            xv = gf_sub(xv, h[i + 1])
                        arg.append(xv)
                    acc += _as_complex(bv) * _as_complex(fn.values[tuple(arg)])
                rhs[x] = acc
        time_residual = max(
            abs(_as_complex(fn.values[x]) - _as_complex(rhs[x])) for x in rhs
        )
        time_zero = False

    zero = params.zero()
    freq_res: Fraction | float = Fraction(0) if exact else 0.0
    for u in _keys(params, n + m):
        padded = u + (zero,)
        mask_key = padded[: n + 1]
        shifted_key = padded[1 : n + m + 1]
        lhs = phi.values[u]
        rhs_v = m0.values[mask_key] * phi.values[shifted_key]
        diff = abs(lhs - rhs_v)
        if diff > freq_res:
            freq_res = diff

    time_tol = 0.0 if exact else TIME_TOL
    freq_tol = 0.0 if exact else FREQ_TOL
    if exact:
        passed = time_zero and freq_res == 0
    else:
        passed = time_residual <= time_tol and float(freq_res) <= freq_tol
    return RefinementReport(time_residual, float(freq_res), time_tol, freq_tol, passed, exact)
