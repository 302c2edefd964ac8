"""Incremental CDCL SAT solver with assumptions and failed-assumption cores.

The :class:`Solver` keeps clauses across calls, so callers may load a base
formula once and issue many :meth:`Solver.solve` queries under different
assumptions. The module-level :func:`solve`, :func:`solve_assuming` and
:func:`implies` wrap a throwaway solver around a :class:`~pqecheck.cnf.Cnf`.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Iterable

from .cnf import Clause, Cnf
from .errors import SolverTimeout, UsageError


@dataclass(frozen=True, eq=False)
class Sat:
    model: dict = field(repr=False)
    is_sat = True

    def __bool__(self):
        return True


@dataclass(frozen=True, eq=False)
class Unsat:
    core: frozenset = frozenset()
    is_sat = False

    def __bool__(self):
        return False


def luby(i: int) -> int:
    """i-th element (0-based) of the Luby restart sequence 1 1 2 1 1 2 4 ..."""
    size, seq = 1, 0
    while size < i + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != i:
        size = (size - 1) >> 1
        seq -= 1
        i = i % size
    return 1 << seq


class Solver:
    """Conflict-driven clause-learning solver.

    ``conflict_budget`` bounds the conflicts of a single :meth:`solve` call;
    exceeding it raises :class:`~pqecheck.errors.SolverTimeout`.
    """

    RESTART_BASE = 64

    def __init__(self, seed: int = 0, conflict_budget: int | None = None):
        self.num_vars = 0
        self.conflict_budget = conflict_budget
        self._rng = random.Random(seed)
        self._val = {}  # literal -> 1 true / -1 false / 0 unassigned
        self._level = [0]
        self._reason = [None]
        self._activity = [0.0]
        self._phase = [False]
        self._seen = [False]
        self._watches = {}
        self._trail = []
        self._trail_lim = []
        self._qhead = 0
        self._clauses = []
        self._learnts = []
        self._max_learnts = 4000
        self._heap = []
        self._var_inc = 1.0
        self._ok = True
        self.stats = {"solves": 0, "decisions": 0, "conflicts": 0, "propagations": 0}

    # -- variables and clauses ---------------------------------------------

    def new_var(self) -> int:
        self.num_vars += 1
        v = self.num_vars
        self._val[v] = 0
        self._val[-v] = 0
        self._level.append(0)
        self._reason.append(None)
        act = self._rng.random() * 1e-5
        self._activity.append(act)
        self._phase.append(False)
        self._seen.append(False)
        self._watches[v] = []
        self._watches[-v] = []
        heapq.heappush(self._heap, (-act, v))
        return v

    def ensure_vars(self, n: int):
        while self.num_vars < n:
            self.new_var()

    def add_clause(self, lits: Iterable[int]) -> bool:
        """Add a permanent clause. Returns False once the formula is unsat at level 0."""
        if not self._ok:
            return False
        self._cancel_until(0)
        val = self._val
        seen = set()
        out = []
        for l in lits:
            if l == 0:
                raise UsageError("literal 0 is not allowed")
            if abs(l) > self.num_vars:
                self.ensure_vars(abs(l))
            if -l in seen:
                return True
            if l in seen:
                continue
            seen.add(l)
            v = val[l]
            if v == 1:
                return True
            if v == 0:
                out.append(l)
        if not out:
            self._ok = False
            return False
        if len(out) == 1:
            self._assign(out[0], None)
            if self._propagate() is not None:
                self._ok = False
                return False
            return True
        self._clauses.append(out)
        self._watches[out[0]].append(out)
        self._watches[out[1]].append(out)
        return True

    def add_cnf(self, f) -> bool:
        self.ensure_vars(getattr(f, "num_vars", 0))
        ok = True
        for c in f:
            ok = self.add_clause(c) and ok
        return ok

    @property
    def ok(self) -> bool:
        return self._ok

    # -- core machinery ----------------------------------------------------

    def _assign(self, lit, reason):
        v = abs(lit)
        self._val[lit] = 1
        self._val[-lit] = -1
        self._level[v] = len(self._trail_lim)
        self._reason[v] = reason
        self._trail.append(lit)

    def _cancel_until(self, level):
        if len(self._trail_lim) <= level:
            return
        trail = self._trail
        val = self._val
        phase = self._phase
        act = self._activity
        heap = self._heap
        stop = self._trail_lim[level]
        for i in range(len(trail) - 1, stop - 1, -1):
            lit = trail[i]
            v = abs(lit)
            val[lit] = 0
            val[-lit] = 0
            self._reason[v] = None
            phase[v] = lit > 0
            heapq.heappush(heap, (-act[v], v))
        del trail[stop:]
        del self._trail_lim[level:]
        self._qhead = len(trail)

    def _propagate(self):
        val = self._val
        watches = self._watches
        trail = self._trail
        level = self._level
        reason = self._reason
        dl = len(self._trail_lim)
        props = 0
        while self._qhead < len(trail):
            p = trail[self._qhead]
            self._qhead += 1
            props += 1
            fl = -p
            ws = watches[fl]
            n = len(ws)
            i = j = 0
            while i < n:
                c = ws[i]
                i += 1
                if c[0] == fl:
                    c[0] = c[1]
                    c[1] = fl
                first = c[0]
                if val[first] == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(c)):
                    lk = c[k]
                    if val[lk] != -1:
                        c[1] = lk
                        c[k] = fl
                        watches[lk].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if val[first] == -1:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self._qhead = len(trail)
                        self.stats["propagations"] += props
                        return c
                    v = abs(first)
                    val[first] = 1
                    val[-first] = -1
                    level[v] = dl
                    reason[v] = c
                    trail.append(first)
            del ws[j:]
        self.stats["propagations"] += props
        return None

    def _bump(self, v):
        act = self._activity
        act[v] += self._var_inc
        if act[v] > 1e100:
            for u in range(1, self.num_vars + 1):
                act[u] *= 1e-100
            self._var_inc *= 1e-100
            self._heap = [(-act[u], u) for u in range(1, self.num_vars + 1) if self._val[u] == 0]
            heapq.heapify(self._heap)
        elif self._val[v] == 0:
            heapq.heappush(self._heap, (-act[v], v))

    def _analyze(self, confl):
        seen = self._seen
        level = self._level
        trail = self._trail
        reason = self._reason
        dl = len(self._trail_lim)
        learnt = [0]
        path = 0
        p = 0
        idx = len(trail) - 1
        touched = []
        while True:
            for q in confl:
                if q == p:
                    continue
                v = abs(q)
                if not seen[v] and level[v] > 0:
                    seen[v] = True
                    touched.append(v)
                    self._bump(v)
                    if level[v] >= dl:
                        path += 1
                    else:
                        learnt.append(q)
            while not seen[abs(trail[idx])]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            confl = reason[abs(p)]
            seen[abs(p)] = False
            path -= 1
            if path <= 0:
                break
        learnt[0] = -p
        # local minimisation: drop literals implied by others in the clause
        keep = [learnt[0]]
        for q in learnt[1:]:
            r = reason[abs(q)]
            if r is None:
                keep.append(q)
                continue
            for x in r:
                if x != -q and not seen[abs(x)] and level[abs(x)] > 0:
                    keep.append(q)
                    break
        for v in touched:
            seen[v] = False
        learnt = keep
        if len(learnt) == 1:
            bt = 0
        else:
            best = 1
            for i in range(2, len(learnt)):
                if level[abs(learnt[i])] > level[abs(learnt[best])]:
                    best = i
            learnt[1], learnt[best] = learnt[best], learnt[1]
            bt = level[abs(learnt[1])]
        self._var_inc *= 1.0 / 0.95
        return learnt, bt

    def _analyze_final(self, p):
        """Subset of assumptions (including ``p``) responsible for ``p`` being false."""
        core = {p}
        v0 = abs(p)
        if self._level[v0] == 0:
            return core
        seen = self._seen
        seen[v0] = True
        trail = self._trail
        reason = self._reason
        level = self._level
        for i in range(len(trail) - 1, self._trail_lim[0] - 1, -1):
            x = trail[i]
            v = abs(x)
            if not seen[v]:
                continue
            r = reason[v]
            if r is None:
                core.add(x)
            else:
                for q in r:
                    if q != x and level[abs(q)] > 0:
                        seen[abs(q)] = True
            seen[v] = False
        seen[v0] = False
        return core

    def _pick_branch(self):
        heap = self._heap
        val = self._val
        act = self._activity
        while heap:
            a, v = heapq.heappop(heap)
            if val[v] == 0 and -a == act[v]:
                return v
        for v in range(1, self.num_vars + 1):
            if val[v] == 0:
                return v
        return 0

    def _reduce_db(self):
        reason = self._reason
        val = self._val
        locked = []
        rest = []
        for c in self._learnts:
            if len(c) <= 2 or (reason[abs(c[0])] is c and val[c[0]] == 1):
                locked.append(c)
            else:
                rest.append(c)
        rest.sort(key=len)
        kept = locked + rest[: len(rest) // 2]
        self._learnts = kept
        for ws in self._watches.values():
            ws.clear()
        for c in self._clauses:
            self._watches[c[0]].append(c)
            self._watches[c[1]].append(c)
        for c in kept:
            self._watches[c[0]].append(c)
            self._watches[c[1]].append(c)
        self._max_learnts = int(self._max_learnts * 1.1)

    # -- public queries ----------------------------------------------------

    def solve(self, assumptions: Iterable[int] = ()):
        """Decide the loaded clauses under ``assumptions``.

        Returns :class:`Sat` with a total model over all solver variables, or
        :class:`Unsat` whose core is a subset of the assumptions.
        """
        self.stats["solves"] += 1
        assumptions = list(assumptions)
        for a in assumptions:
            if abs(a) > self.num_vars:
                self.ensure_vars(abs(a))
        if not self._ok:
            return Unsat(frozenset())
        self._cancel_until(0)
        if self._propagate() is not None:
            self._ok = False
            return Unsat(frozenset())
        val = self._val
        conflicts = 0
        restart_no = 0
        restart_limit = luby(0) * self.RESTART_BASE
        since_restart = 0
        try:
            while True:
                confl = self._propagate()
                if confl is not None:
                    conflicts += 1
                    since_restart += 1
                    self.stats["conflicts"] += 1
                    if not self._trail_lim:
                        self._ok = False
                        return Unsat(frozenset())
                    learnt, bt = self._analyze(confl)
                    self._cancel_until(bt)
                    if len(learnt) == 1:
                        self._assign(learnt[0], None)
                    else:
                        self._learnts.append(learnt)
                        self._watches[learnt[0]].append(learnt)
                        self._watches[learnt[1]].append(learnt)
                        self._assign(learnt[0], learnt)
                    if self.conflict_budget is not None and conflicts > self.conflict_budget:
                        raise SolverTimeout(
                            f"conflict budget {self.conflict_budget} exhausted",
                            dict(self.stats),
                        )
                    continue
                if since_restart >= restart_limit:
                    restart_no += 1
                    since_restart = 0
                    restart_limit = luby(restart_no) * self.RESTART_BASE
                    self._cancel_until(0)
                    if len(self._learnts) > self._max_learnts:
                        self._reduce_db()
                    continue
                dl = len(self._trail_lim)
                if dl < len(assumptions):
                    a = assumptions[dl]
                    va = val[a]
                    if va == 1:
                        self._trail_lim.append(len(self._trail))
                        continue
                    if va == -1:
                        core = self._analyze_final(a)
                        return Unsat(frozenset(core))
                    self._trail_lim.append(len(self._trail))
                    self._assign(a, None)
                    continue
                v = self._pick_branch()
                if v == 0:
                    model = {u: val[u] == 1 for u in range(1, self.num_vars + 1)}
                    return Sat(model)
                self.stats["decisions"] += 1
                self._trail_lim.append(len(self._trail))
                self._assign(v if self._phase[v] else -v, None)
        finally:
            self._cancel_until(0)


def minimize_core(solver: Solver, core: Iterable[int], budget: int | None = None) -> frozenset:
    """Greedy drop-one shrinking of an unsat core; stops after ``budget`` re-solves."""
    core = sorted(core, key=abs)
    i = 0
    tries = 0
    while i < len(core) and (budget is None or tries < budget):
        cand = core[:i] + core[i + 1 :]
        tries += 1
        r = solver.solve(cand)
        if r.is_sat:
            i += 1
        else:
            core = [l for l in cand if l in r.core]
    return frozenset(core)


def _solver_for(f: Cnf, seed: int, conflict_budget) -> Solver:
    s = Solver(seed=seed, conflict_budget=conflict_budget)
    s.add_cnf(f)
    return s


def solve(f: Cnf, seed: int = 0, conflict_budget: int | None = None):
    return _solver_for(f, seed, conflict_budget).solve()


def solve_assuming(
    f: Cnf,
    assumptions: Iterable[int],
    seed: int = 0,
    conflict_budget: int | None = None,
    minimize: int | None = 0,
):
    """Solve under assumptions; an Unsat core is optionally shrunk with ``minimize`` retests."""
    s = _solver_for(f, seed, conflict_budget)
    r = s.solve(assumptions)
    if not r.is_sat and minimize != 0 and len(r.core) > 1:
        return Unsat(minimize_core(s, r.core, minimize))
    return r


def implies(f: Cnf, c: Clause, seed: int = 0, conflict_budget: int | None = None) -> bool:
    """True iff every model of ``f`` satisfies clause ``c``."""
    s = _solver_for(f, seed, conflict_budget)
    return not s.solve([-l for l in c]).is_sat


def core_clause(core: Iterable[int]) -> Clause:
    """The clause implied by the formula when ``core`` is a failed-assumption set."""
    return Clause(-l for l in core)
