"""Mask-square tables on windows and the associated array dynamics.

The (N+1)-entry key (w_1, ..., w_N, a) holds the squared mask modulus
on the window W = (w_1, ..., w_N) continued by a.  A table is feasible
when every non-root window spreads total mass 1 over its digraph
successors and carries none elsewhere, and the all-zero key has value 1.

Iterating

    state'[W] = sum over a of table[W + (a,)] * state[W[1:] + (a,)]

from the zero-padded product start drives every component to 1; the
index of the first all-ones array is the constancy level at which the
constructed scaling function has orthonormal shifts.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    ConstraintViolation,
    InternalConsistencyError,
    NonConvergenceError,
    ParameterError,
)
from .galois import FieldParams, GFElem
from .validtree import MaskDigraph, Window, WindowTree, window_sort_key

__all__ = [
    "LambdaArray",
    "StateArray",
    "FixedPointResult",
    "LemmaReport",
    "assign_lambda",
    "validate_lambda_table",
    "init_state",
    "step_dynamics",
    "iterate_to_fixed_point",
    "verify_level_lemmas",
    "STRATEGIES",
]

Number = Fraction | float

STRATEGIES = ("haar", "uniform", "dirichlet", "explicit")

_FLOAT_SUM_TOL = 1e-12
_FLOAT_ONES_TOL = 1e-12
_FLOAT_RANGE_TOL = 1e-9


def _is_exact(v) -> bool:
    return isinstance(v, (Fraction, int))


def _as_number(v) -> Number:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, int):
        return Fraction(v)
    return float(v)


def _value_to_json(v: Number):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return float(v)


def _value_from_json(x) -> Number:
    if isinstance(x, str):
        num, _, den = x.partition("/")
        return Fraction(int(num), int(den) if den else 1)
    if isinstance(x, int):
        return Fraction(x)
    return float(x)


def _key_json(key: tuple[GFElem, ...]) -> list:
    return [list(e.digits) for e in key]


@dataclass
class LambdaArray:
    """Dense squared-mask table over all (N+1)-tuples of field elements."""

    params: FieldParams
    N: int
    table: dict[tuple[GFElem, ...], Number]
    exact: bool

    def keys_sorted(self) -> list[tuple[GFElem, ...]]:
        return sorted(self.table, key=window_sort_key)

    def to_json_dict(self) -> dict:
        return {
            "params": self.params.to_json_dict(),
            "N": self.N,
            "entries": [
                {"window": _key_json(k), "value": _value_to_json(self.table[k])}
                for k in self.keys_sorted()
            ],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "LambdaArray":
        params = FieldParams.from_json_dict(d["params"])
        n = int(d["N"])
        table: dict[tuple[GFElem, ...], Number] = {
            key: Fraction(0)
            for key in itertools.product(params.elements(), repeat=n + 1)
        }
        for rec in d["entries"]:
            key = tuple(params.from_digits(x) for x in rec["window"])
            if len(key) != n + 1:
                raise ParameterError(f"entry key must have {n + 1} components")
            table[key] = _value_from_json(rec["value"])
        exact = all(_is_exact(v) for v in table.values())
        if not exact:
            table = {k: float(v) for k, v in table.items()}
        return cls(params, n, table, exact)


@dataclass
class StateArray:
    """One iterate of the dynamics: a value per N-tuple of field elements."""

    params: FieldParams
    N: int
    table: dict[Window, Number]
    exact: bool

    def all_ones(self, tol: float | None = None) -> bool:
        if self.exact:
            return all(v == 1 for v in self.table.values())
        t = _FLOAT_ONES_TOL if tol is None else tol
        return all(abs(v - 1) <= t for v in self.table.values())

    def to_json_dict(self) -> dict:
        return {
            "N": self.N,
            "entries": [
                {"window": _key_json(k), "value": _value_to_json(self.table[k])}
                for k in sorted(self.table, key=window_sort_key)
            ],
        }


def _choice_sets(g: MaskDigraph) -> dict[Window, tuple[GFElem, ...]]:
    """Admissible continuations per window; the root's mass sits on zero."""
    zero = g.params.zero()
    out: dict[Window, tuple[GFElem, ...]] = {}
    for w, choices in g.succ.items():
        out[w] = choices if choices else (zero,)
    return out


def _simplex_point(rng: random.Random, k: int) -> list[Fraction]:
    """Random rational point of the (k-1)-simplex, summing to exactly 1."""
    if k == 1:
        return [Fraction(1)]
    weights = []
    for _ in range(k):
        w = Fraction(-math.log(1.0 - rng.random())).limit_denominator(10**9)
        weights.append(w if w > 0 else Fraction(1, 10**9))
    total = sum(weights)
    return [w / total for w in weights]


def validate_lambda_table(g: MaskDigraph, lam: LambdaArray) -> None:
    """Raise ConstraintViolation unless ``lam`` is feasible for ``g``."""
    if lam.params != g.params or lam.N != g.N:
        raise ParameterError("table and digraph disagree on field or window size")
    choice = _choice_sets(g)
    bad: list[tuple[str, str]] = []
    tol = 0 if lam.exact else _FLOAT_SUM_TOL
    for key in lam.keys_sorted():
        v = lam.table[key]
        if v < 0 or v > 1:
            bad.append((str(_key_json(key)), f"value {v} outside [0, 1]"))
    for w in sorted(g.levels, key=window_sort_key):
        allowed = set(choice[w])
        row_sum: Number = Fraction(0) if lam.exact else 0.0
        for a in g.params.elements():
            v = lam.table[w + (a,)]
            if a in allowed:
                row_sum += v
            elif v != 0:
                bad.append(
                    (str(_key_json(w + (a,))), f"mass {v} outside the successor set")
                )
        if abs(row_sum - 1) > tol:
            bad.append((str(_key_json(w)), f"row sum {row_sum} != 1"))
    if bad:
        raise ConstraintViolation(
            f"mask-square table violates the row constraints at {len(bad)} places",
            details=bad,
        )


def assign_lambda(
    g: MaskDigraph,
    strategy: str = "haar",
    *,
    seed: int | None = None,
    table=None,
) -> LambdaArray:
    """Build a feasible mask-square table for the digraph.

    haar       puts all mass on the tree-parent continuation (0/1 table);
    uniform    splits mass equally over the successor set;
    dirichlet  draws a random rational simplex point per window (seeded);
    explicit   validates a caller-supplied table (dict keyed by tuples,
               or a LambdaArray), normalized to a dense exact table when
               all values are rational.
    """
    if strategy not in STRATEGIES:
        raise ParameterError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
    params = g.params
    elems = params.elements()
    zero = params.zero()
    choice = _choice_sets(g)
    windows = sorted(g.levels, key=window_sort_key)

    if strategy == "explicit":
        if table is None:
            raise ParameterError("explicit strategy needs a table")
        if isinstance(table, LambdaArray):
            raw = table.table
        else:
            raw = dict(table)
        dense: dict[tuple[GFElem, ...], Number] = {}
        for key in itertools.product(elems, repeat=g.N + 1):
            dense[key] = _as_number(raw.get(key, 0))
        exact = all(_is_exact(v) for v in dense.values())
        if not exact:
            dense = {k: float(v) for k, v in dense.items()}
        lam = LambdaArray(params, g.N, dense, exact)
        validate_lambda_table(g, lam)
        return lam

    rows: dict[Window, dict[GFElem, Fraction]] = {}
    if strategy == "haar":
        for w in windows:
            pick = g.tree_parent.get(w, zero)
            rows[w] = {pick: Fraction(1)}
    elif strategy == "uniform":
        for w in windows:
            opts = choice[w]
            share = Fraction(1, len(opts))
            rows[w] = {a: share for a in opts}
    else:  # dirichlet
        rng = random.Random(0 if seed is None else seed)
        for w in windows:
            opts = choice[w]
            point = _simplex_point(rng, len(opts))
            rows[w] = dict(zip(opts, point))

    dense = {}
    for key in itertools.product(elems, repeat=g.N + 1):
        dense[key] = rows[key[:-1]].get(key[-1], Fraction(0))
    lam = LambdaArray(params, g.N, dense, True)
    validate_lambda_table(g, lam)
    return lam


def init_state(lam: LambdaArray) -> StateArray:
    """Start of the trajectory: product of the N zero-padded window slides."""
    zero = lam.params.zero()
    table: dict[Window, Number] = {}
    for w in itertools.product(lam.params.elements(), repeat=lam.N):
        acc: Number = Fraction(1) if lam.exact else 1.0
        for t in range(lam.N):
            acc *= lam.table[w[t:] + (zero,) * (t + 1)]
        table[w] = acc
    return StateArray(lam.params, lam.N, table, lam.exact)


def step_dynamics(lam: LambdaArray, prev: StateArray) -> StateArray:
    """One application of the window recurrence."""
    if lam.params != prev.params or lam.N != prev.N:
        raise ParameterError("table and state disagree on field or window size")
    elems = lam.params.elements()
    table: dict[Window, Number] = {}
    for w, _ in prev.table.items():
        acc: Number = Fraction(0) if lam.exact and prev.exact else 0.0
        shifted = w[1:]
        for a in elems:
            lv = lam.table[w + (a,)]
            if lv:
                acc += lv * prev.table[shifted + (a,)]
        if acc < 0 or acc > 1 + (_FLOAT_RANGE_TOL if not (lam.exact and prev.exact) else 0):
            raise InternalConsistencyError(
                f"state component {acc} left [0, 1]; the table must be infeasible"
            )
        table[w] = acc
    return StateArray(lam.params, lam.N, table, lam.exact and prev.exact)


@dataclass
class FixedPointResult:
    """First all-ones index and the trajectory up to it."""

    m: int
    states: list[StateArray]


def iterate_to_fixed_point(lam: LambdaArray, bound: int) -> FixedPointResult:
    """Smallest n with an all-ones iterate, searching n = 0..bound.

    For tables produced by assign_lambda the all-ones array is reached
    no later than the window-tree height minus N, so exhausting the
    bound signals corrupted input; the error carries the trajectory.
    """
    if bound < 0:
        raise ParameterError(f"iteration bound must be >= 0, got {bound}")
    state = init_state(lam)
    states = [state]
    for n in range(bound + 1):
        if state.all_ones():
            return FixedPointResult(n, states)
        if n == bound:
            break
        state = step_dynamics(lam, state)
        states.append(state)
    raise NonConvergenceError(
        f"no all-ones iterate within bound {bound}", states=states
    )


@dataclass
class LemmaReport:
    """Level-wise absorption facts checked along a trajectory."""

    passed: bool
    failures: list[str] = field(default_factory=list)


def verify_level_lemmas(wt: WindowTree, states: list[StateArray]) -> LemmaReport:
    """Check that windows of level <= N + n are pinned at 1 in iterate n.

    Also checks absorption: a component equal to 1 never moves again.
    """
    failures: list[str] = []
    n_win = wt.N
    for n, st in enumerate(states):
        tol = 0 if st.exact else _FLOAT_ONES_TOL
        for w, lvl in wt.levels.items():
            if lvl <= n_win + n and abs(st.table[w] - 1) > tol:
                failures.append(
                    f"iterate {n}: window {_key_json(w)} at level {lvl} has value {st.table[w]}"
                )
    for n in range(1, len(states)):
        prev, cur = states[n - 1], states[n]
        tol = 0 if (prev.exact and cur.exact) else _FLOAT_ONES_TOL
        for w, v in prev.table.items():
            if abs(v - 1) <= tol and abs(cur.table[w] - 1) > tol:
                failures.append(
                    f"iterate {n}: window {_key_json(w)} fell away from 1"
                )
    return LemmaReport(passed=not failures, failures=failures)
