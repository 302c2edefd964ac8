"""Brute-force ground truth: truth tables, explicit-state reachability, QE by enumeration.

Everything here enumerates assignments with numpy and is meant for small
models (at most 24 variables in any one table).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .cnf import Clause, Cnf, simplify
from .errors import UsageError

MAX_TABLE_VARS = 24


def truth_table(f: Cnf, order: list) -> np.ndarray:
    """Boolean vector over all assignments of ``order``; bit i of the index is ``order[i]``."""
    n = len(order)
    if n > MAX_TABLE_VARS:
        raise UsageError(f"{n} variables exceed the enumeration bound {MAX_TABLE_VARS}")
    pos = {v: i for i, v in enumerate(order)}
    missing = f.vars - pos.keys()
    if missing:
        raise UsageError(f"variables {sorted(missing)} are not in the enumeration order")
    idx = np.arange(1 << n, dtype=np.int64)
    bits = [((idx >> i) & 1).astype(bool) for i in range(n)]
    out = np.ones(1 << n, dtype=bool)
    for c in f:
        sat = np.zeros(1 << n, dtype=bool)
        for l in c:
            b = bits[pos[abs(l)]]
            sat |= b if l > 0 else ~b
        out &= sat
    return out


def exists_table(f: Cnf, free: list) -> np.ndarray:
    """Table over ``free`` of whether some assignment to the other variables satisfies f."""
    free = list(free)
    others = sorted(f.vars - set(free))
    if len(free) + len(others) > MAX_TABLE_VARS:
        raise UsageError(
            f"{len(free) + len(others)} variables exceed the enumeration bound {MAX_TABLE_VARS}"
        )
    t = truth_table(f, free + others)
    return t.reshape(1 << len(others), 1 << len(free)).any(axis=0)


def cover_points(bad: Iterable[int], good: np.ndarray, free: list) -> list:
    """Clauses over ``free`` false on every ``bad`` index and true on every ``good`` one.

    Each clause starts as the minterm clause of a bad point and drops
    literals (ascending variable order) while no good point falls into its
    cube. Bad points already inside an earlier cube are skipped.
    """
    n = len(free)
    good = np.asarray(good, dtype=np.int64)
    all_idx = np.arange(1 << n, dtype=np.int64)
    covered = np.zeros(1 << n, dtype=bool)
    clauses = []
    for idx in bad:
        idx = int(idx)
        if covered[idx]:
            continue
        point = [(idx >> i) & 1 for i in range(n)]
        keep = list(range(n))
        for i in range(n):
            trial = [j for j in keep if j != i]
            mask = np.ones(len(good), dtype=bool)
            for j in trial:
                mask &= ((good >> j) & 1) == point[j]
            if not mask.any():
                keep = trial
        clauses.append(Clause(-free[j] if point[j] else free[j] for j in keep))
        cube = np.ones(1 << n, dtype=bool)
        for j in keep:
            cube &= ((all_idx >> j) & 1) == point[j]
        covered |= cube
    return clauses


def pqe_check(a: Cnf, b: Cnf, w: Iterable[int], a_star: Cnf) -> bool:
    """Pointwise test of ``exists W [A and B] == A* and exists W [B]``."""
    w = set(w)
    bad = a_star.vars & w
    if bad:
        raise UsageError(f"A* mentions quantified variables {sorted(bad)}")
    free = sorted((a.vars | b.vars | a_star.vars) - w)
    lhs = exists_table(a & b, free)
    rhs = truth_table(a_star, free) & exists_table(b, free)
    return bool(np.array_equal(lhs, rhs))


def qe_enum(f: Cnf, w: Iterable[int]) -> Cnf:
    """A CNF over the free variables equivalent to ``exists W [f]``."""
    w = set(w)
    free = sorted(f.vars - w)
    t = exists_table(f, free)
    clauses = cover_points(np.flatnonzero(~t), np.flatnonzero(t), free)
    return Cnf(simplify(clauses), f.num_vars)


# -- explicit-state reachability ---------------------------------------------------


def state_bits(idx: int, k: int) -> tuple:
    """State tuple for an integer index; bit i-1 of the index is variable i."""
    return tuple(bool((idx >> i) & 1) for i in range(k))


def state_index(s) -> int:
    return sum(1 << i for i, b in enumerate(s) if b)


def state_str(s) -> str:
    return "".join("1" if b else "0" for b in s)


@dataclass(frozen=True)
class ReachReport:
    levels: tuple  # tuple of sorted tuples of state indices
    k: int

    @property
    def diameter(self) -> int:
        return len(self.levels) - 1

    @property
    def reachable(self) -> frozenset:
        return frozenset(s for lv in self.levels for s in lv)

    def depth(self) -> dict:
        return {s: i for i, lv in enumerate(self.levels) for s in lv}

    def format(self, dump: bool = False) -> str:
        lines = []
        for i, lv in enumerate(self.levels):
            lines.append(f"level {i}: {len(lv)}")
            if dump:
                for s in sorted(lv, key=lambda x: state_str(state_bits(x, self.k))):
                    lines.append(f"  {state_str(state_bits(s, self.k))}")
        return "\n".join(lines) + "\n"


class _Explicit:
    """Successor relation of a system as a boolean matrix over state indices."""

    def __init__(self, ts):
        k, m = ts.k, ts.m
        if k + m > MAX_TABLE_VARS:
            raise UsageError(f"{k + m} state and input bits exceed the oracle bound {MAX_TABLE_VARS}")
        self.k, self.m = k, m
        n = 1 << k
        order = list(range(1, 2 * k + m + 1))
        if 2 * k + m <= 22:
            t = truth_table(ts.trans, order)
            # index = s + (x << k) + (s' << (k+m))
            t = t.reshape(n, 1 << m, n)  # [s', x, s]
            self.step = t  # step[s', x, s]
            self.succ = t.any(axis=1).T.copy()  # succ[s, s']
        else:
            self.step = None
            self.succ = np.zeros((n, n), dtype=bool)
            from .cnf import cofactor

            rest = list(range(k + 1, 2 * k + m + 1))
            for s in range(n):
                a = {i + 1: bool((s >> i) & 1) for i in range(k)}
                t = truth_table(cofactor(ts.trans, a), rest).reshape(n, 1 << m)
                self.succ[s] = t.any(axis=1)
        self.init = truth_table(ts.init, list(range(1, k + 1)))
        self.prop = truth_table(ts.prop, list(range(1, k + 1)))
        self.ts = ts

    def input_for(self, s: int, t: int) -> int:
        if self.step is not None:
            xs = np.flatnonzero(self.step[t, :, s])
        else:
            from .cnf import cofactor

            k, m = self.k, self.m
            a = {i + 1: bool((s >> i) & 1) for i in range(k)}
            a.update({k + m + i + 1: bool((t >> i) & 1) for i in range(k)})
            xs = np.flatnonzero(truth_table(cofactor(self.ts.trans, a), list(range(k + 1, k + m + 1))))
        return int(min(xs, key=lambda x: state_str(state_bits(int(x), self.m))))

    def bfs(self):
        n = 1 << self.k
        seen = self.init.copy()
        frontier = self.init.copy()
        levels = [np.flatnonzero(frontier)]
        parent = {}
        while True:
            img = self.succ[frontier].any(axis=0) if frontier.any() else np.zeros(n, bool)
            new = img & ~seen
            if not new.any():
                break
            for t in np.flatnonzero(new):
                preds = np.flatnonzero(frontier & self.succ[:, t])
                parent[int(t)] = int(min(preds, key=lambda p: state_str(state_bits(int(p), self.k))))
            seen |= new
            frontier = new
            levels.append(np.flatnonzero(new))
        return levels, parent


def reach_bfs(ts) -> ReachReport:
    """Exact level sets: level i holds the states first reachable in i transitions."""
    levels, _ = _Explicit(ts).bfs()
    return ReachReport(tuple(tuple(int(s) for s in lv) for lv in levels), ts.k)


def exact_diameter(ts) -> int:
    if not ts.stuttered:
        ts = ts.add_stuttering()
    return reach_bfs(ts).diameter


def check_property_bf(ts):
    """Holds with the exact diameter, or a shortest counterexample.

    Among shortest traces the result is the lexicographically least by state
    bit strings, and inputs are the least valuation enabling each step.
    """
    from .system import Counterexample, Holds, Trace

    ex = _Explicit(ts)
    levels, parent = ex.bfs()
    for lv in levels:
        bad = [int(s) for s in lv if not ex.prop[s]]
        if bad:
            t = min(bad, key=lambda s: state_str(state_bits(s, ts.k)))
            path = [t]
            while path[-1] in parent:
                path.append(parent[path[-1]])
            path.reverse()
            states = tuple(state_bits(s, ts.k) for s in path)
            inputs = tuple(state_bits(ex.input_for(a, b), ts.m) for a, b in zip(path, path[1:]))
            return Counterexample(Trace(states, inputs))
    diam = len(levels) - 1
    return Holds(diam)
