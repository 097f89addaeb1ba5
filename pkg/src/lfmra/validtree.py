"""Labeled rooted trees over GF(p^s) and their derived window structures.

A tree is admissible for window size N when

  1. every vertex label is a field element,
  2. the root and every vertex at level N-1 carry the zero label,
  3. every string of N labels read along a root-directed path occurs
     exactly once in the whole tree.

Condition 3 puts the vertices of level >= N-1 in bijection with the
p^(sN) label windows, which become the vertices of the lifted window
tree.  The successor digraph then connects each window to every window
of strictly smaller level obtained by dropping its first entry and
appending a new last entry.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from .errors import NoSolutionError, ParameterError, StructureError
from .galois import FieldParams, GFElem, gf_index

__all__ = [
    "Tree",
    "ValidationReport",
    "WindowTree",
    "MaskDigraph",
    "validate_tree",
    "generate_tree",
    "build_window_tree",
    "build_digraph",
    "window_sort_key",
]

Window = tuple[GFElem, ...]


def window_sort_key(window: Window) -> tuple[tuple[int, ...], ...]:
    """Stable ordering key for label windows (used for deterministic output)."""
    return tuple(e.digits for e in window)


@dataclass
class Tree:
    """Rooted tree with GF(p^s) labels; arcs run child -> parent."""

    params: FieldParams
    N: int
    labels: dict[int, GFElem]
    parent: dict[int, int | None]

    def root(self) -> int:
        roots = [v for v, p in self.parent.items() if p is None]
        if len(roots) != 1:
            raise StructureError(f"tree must have exactly one root, found {len(roots)}")
        return roots[0]

    def levels(self) -> dict[int, int]:
        """Distance of every vertex from the root; detects cycles and orphans."""
        root = self.root()
        levels: dict[int, int] = {root: 0}
        for v in self.labels:
            if v in levels:
                continue
            trail = []
            cur = v
            while cur not in levels:
                trail.append(cur)
                if cur not in self.parent:
                    raise StructureError(f"vertex {cur} has no parent entry")
                nxt = self.parent[cur]
                if nxt is None:
                    break  # second root; caught by root()
                if nxt not in self.labels:
                    raise StructureError(f"vertex {cur} points to unknown parent {nxt}")
                if nxt in trail:
                    raise StructureError(f"parent map contains a cycle through {nxt}")
                cur = nxt
            base = levels.get(cur)
            if base is None:
                raise StructureError("disconnected component in parent map")
            for i, u in enumerate(reversed(trail)):
                levels[u] = base + i + 1
        return levels

    def height(self) -> int:
        return max(self.levels().values())

    def children(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {v: [] for v in self.labels}
        for v, p in self.parent.items():
            if p is not None:
                out[p].append(v)
        for lst in out.values():
            lst.sort()
        return out

    def path_window(self, v: int, n: int) -> Window | None:
        """Labels of the n consecutive vertices from v toward the root, or None."""
        out = []
        cur: int | None = v
        for _ in range(n):
            if cur is None:
                return None
            out.append(self.labels[cur])
            cur = self.parent[cur]
        return tuple(out)

    def to_json_dict(self) -> dict:
        verts = [
            {"id": v, "label": list(self.labels[v].digits), "parent": self.parent[v]}
            for v in sorted(self.labels)
        ]
        return {"params": self.params.to_json_dict(), "N": self.N, "vertices": verts}

    @classmethod
    def from_json_dict(cls, d: dict) -> "Tree":
        params = FieldParams.from_json_dict(d["params"])
        labels: dict[int, GFElem] = {}
        parent: dict[int, int | None] = {}
        for rec in d["vertices"]:
            v = int(rec["id"])
            if v in labels:
                raise StructureError(f"duplicate vertex id {v}")
            labels[v] = params.from_digits(rec["label"])
            parent[v] = None if rec["parent"] is None else int(rec["parent"])
        return cls(params, int(d["N"]), labels, parent)


@dataclass
class ValidationReport:
    """Outcome of validate_tree: per-condition violations with witnesses."""

    ok: bool
    height: int
    violations: list[tuple[int, str]] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "ok": self.ok,
            "height": self.height,
            "violations": [{"condition": c, "witness": w} for c, w in self.violations],
        }


def validate_tree(t: Tree, N: int | None = None) -> ValidationReport:
    """Check the three admissibility conditions; structural defects raise."""
    n = t.N if N is None else N
    if n < 1:
        raise ParameterError(f"window size must be >= 1, got {n}")
    if not t.labels:
        raise StructureError("empty tree")
    levels = t.levels()  # raises StructureError on malformed input
    root = t.root()
    height = max(levels.values())
    violations: list[tuple[int, str]] = []

    for v, lab in sorted(t.labels.items()):
        if lab.params != t.params:
            violations.append((1, f"vertex {v} labeled from a different field"))

    if not t.labels[root].is_zero():
        violations.append((2, f"root {root} has nonzero label {t.labels[root].digits}"))
    for v in sorted(t.labels):
        if levels[v] == n - 1 and not t.labels[v].is_zero():
            violations.append((2, f"level-{n - 1} vertex {v} has nonzero label"))

    seen: dict[Window, int] = {}
    for v in sorted(t.labels):
        if levels[v] < n - 1:
            continue
        w = t.path_window(v, n)
        if w is None:
            raise StructureError(f"vertex {v} at level {levels[v]} lacks {n} ancestors")
        if w in seen:
            violations.append(
                (3, f"window {[e.digits for e in w]} at vertices {seen[w]} and {v}")
            )
        else:
            seen[w] = v
    missing = t.params.order**n - len(seen)
    if missing > 0:
        violations.append((3, f"{missing} of {t.params.order ** n} windows never occur"))

    return ValidationReport(ok=not violations, height=height, violations=violations)


def _fill_greedy(
    rng: random.Random,
    params: FieldParams,
    N: int,
    labels: dict[int, GFElem],
    parent: dict[int, int | None],
    used: set[Window],
    records: list[tuple[int, Window, int]],
    level_cap: int | None,
) -> bool:
    """Attach children until every window is used, shallowest candidates first.

    Returns False when a level cap makes the fill impossible for this order.
    """
    elems = list(params.elements())
    total = params.order**N
    buckets: dict[int, list[tuple[int, Window]]] = {}
    for vid, win, lvl in records:
        if level_cap is None or lvl < level_cap:
            buckets.setdefault(lvl, []).append((vid, win))
    next_id = max(labels) + 1
    while len(used) < total:
        placed = False
        for lvl in sorted(buckets):
            bucket = buckets[lvl]
            order = list(range(len(bucket)))
            rng.shuffle(order)
            for pos in order:
                vid, win = bucket[pos]
                ovl = win[: N - 1]
                cands = [e for e in elems if (e,) + ovl not in used]
                if not cands:
                    bucket[pos] = bucket[-1]
                    bucket.pop()
                    if not bucket:
                        del buckets[lvl]
                    placed = True  # state changed; rescan levels
                    break
                e = cands[rng.randrange(len(cands))]
                w = (e,) + ovl
                labels[next_id] = e
                parent[next_id] = vid
                used.add(w)
                child_lvl = lvl + 1
                if level_cap is None or child_lvl < level_cap:
                    buckets.setdefault(child_lvl, []).append((next_id, w))
                next_id += 1
                placed = True
                break
            if placed:
                break
        if not placed:
            return False
    return True


def generate_tree(
    params: FieldParams,
    N: int,
    target_height: int | None = None,
    seed: int = 0,
) -> Tree:
    """Backtracking construction of an admissible tree.

    The tree starts as a chain of N zero labels; every further vertex
    extends a window vertex so that its fresh N-label window is unused.
    With ``target_height`` set, a deepest branch is grown first to hit
    the height exactly, then the remaining windows are filled below the
    cap; the whole search is deterministic for a given seed.
    """
    if N < 1:
        raise ParameterError(f"window size must be >= 1, got {N}")
    if target_height is not None and target_height < 1:
        raise ParameterError(f"target height must be >= 1, got {target_height}")

    zero = params.zero()
    elems = list(params.elements())
    window_root: Window = (zero,) * N

    def fresh_state():
        labels = {i: zero for i in range(N)}
        parent: dict[int, int | None] = {0: None}
        for i in range(1, N):
            parent[i] = i - 1
        used = {window_root}
        records = [(N - 1, window_root, N - 1)]
        return labels, parent, used, records

    if target_height is None:
        rng = random.Random(seed)
        labels, parent, used, records = fresh_state()
        if not _fill_greedy(rng, params, N, labels, parent, used, records, None):
            raise StructureError("uncapped fill stalled; this should be impossible")
        return Tree(params, N, labels, parent)

    chain_len = target_height - (N - 1)
    if chain_len < 1:
        raise NoSolutionError(
            f"height {target_height} is below the minimum {N} for window size {N}"
        )

    for attempt in range(50):
        rng = random.Random(f"{seed}:{attempt}")
        labels, parent, used, records = fresh_state()

        def grow(rec: tuple[int, Window, int], remaining: int) -> bool:
            if remaining == 0:
                return True
            vid, win, lvl = rec
            ovl = win[: N - 1]
            order = list(elems)
            rng.shuffle(order)
            for e in order:
                w = (e,) + ovl
                if w in used:
                    continue
                nid = len(labels)
                labels[nid] = e
                parent[nid] = vid
                used.add(w)
                child = (nid, w, lvl + 1)
                records.append(child)
                if grow(child, remaining - 1):
                    return True
                records.pop()
                used.discard(w)
                del labels[nid], parent[nid]
            return False

        if not grow(records[0], chain_len):
            continue
        if _fill_greedy(rng, params, N, labels, parent, used, records, target_height):
            return Tree(params, N, labels, parent)

    raise NoSolutionError(
        f"no admissible tree of height {target_height} found "
        f"(p={params.p}, s={params.s}, N={N})"
    )


@dataclass
class WindowTree:
    """Lift of an admissible tree to N-label windows."""

    params: FieldParams
    N: int
    levels: dict[Window, int]
    parent: dict[Window, Window]

    @property
    def height(self) -> int:
        return max(self.levels.values())

    def root(self) -> Window:
        return (self.params.zero(),) * self.N

    def to_json_dict(self) -> dict:
        verts = sorted(self.levels, key=window_sort_key)
        return {
            "N": self.N,
            "height": self.height,
            "vertices": [
                {"window": [list(e.digits) for e in w], "level": self.levels[w]}
                for w in verts
            ],
        }


def build_window_tree(t: Tree, N: int | None = None) -> WindowTree:
    """One vertex per N-window read along root-directed paths.

    The window of a vertex at tree level l >= N-1 gets level l - (N-1);
    arcs are inherited from the underlying tree.  Raises StructureError
    when the lift is not a single tree rooted at the all-zero window,
    which the admissibility conditions only guarantee for N <= 2.
    """
    n = t.N if N is None else N
    levels_t = t.levels()
    window_of: dict[int, Window] = {}
    levels: dict[Window, int] = {}
    for v in t.labels:
        lv = levels_t[v]
        if lv < n - 1:
            continue
        w = t.path_window(v, n)
        if w in levels:
            raise StructureError("duplicate window; tree fails the uniqueness condition")
        window_of[v] = w
        levels[w] = lv - (n - 1)
    if len(levels) != t.params.order**n:
        raise StructureError(
            f"expected {t.params.order ** n} windows, found {len(levels)}"
        )
    parent: dict[Window, Window] = {}
    for v, w in window_of.items():
        if levels_t[v] >= n:
            parent[w] = window_of[t.parent[v]]

    roots = [w for w in levels if w not in parent]
    zero_root = (t.params.zero(),) * n
    if roots != [zero_root] and set(roots) != {zero_root}:
        raise StructureError(
            "window lift is not a single tree rooted at the zero window"
        )
    if levels[zero_root] != 0:
        raise StructureError("zero window does not sit at level 0")
    return WindowTree(t.params, n, levels, parent)


@dataclass
class MaskDigraph:
    """Successor digraph on windows: drop the first entry, append a new last one."""

    params: FieldParams
    N: int
    levels: dict[Window, int]
    succ: dict[Window, tuple[GFElem, ...]]
    tree_parent: dict[Window, GFElem]

    def root(self) -> Window:
        return (self.params.zero(),) * self.N


def build_digraph(wt: WindowTree) -> MaskDigraph:
    """Connect each window to every lesser-level window matching its overlap.

    The recorded successor set of a window W lists the admissible new
    last entries; the window's own tree parent is always among them.
    """
    elems = wt.params.elements()
    succ: dict[Window, tuple[GFElem, ...]] = {}
    tree_parent: dict[Window, GFElem] = {}
    for w, lvl in wt.levels.items():
        overlap = w[1:]
        choices = tuple(
            e for e in sorted(elems, key=gf_index) if wt.levels[overlap + (e,)] < lvl
        )
        succ[w] = choices
        if w in wt.parent:
            tp = wt.parent[w][-1]
            tree_parent[w] = tp
            if tp not in choices:
                raise StructureError(
                    "tree parent missing from successor set; lift is inconsistent"
                )
        elif choices:
            raise StructureError("root window must have no successors")
    return MaskDigraph(wt.params, wt.N, dict(wt.levels), succ, tree_parent)
