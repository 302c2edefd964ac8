"""Property proving by pushing the initial-state clauses through time frames.

The checker keeps two clause sets per frame i, both over the state bits of
frame i (stored unshifted, over variables 1..k):

``H[i]``
    clauses derived from I_1 by repeated partial quantifier elimination.
    ``exists S^{i-1} [I_0 and I_1 and T^i]`` equals ``H[i]`` conjoined with the
    same formula where I_1 is replaced by H[1..i-1].
``R[i]``
    clauses implied by ``I_0 and T^i`` (learned facts about states that are
    not reachable in exactly i steps).

A clause C of H[n] is pushed by taking it out of
``exists S^n [I_0 and H^n and C and T^{n+1}]``. Clauses of the result that
are implied by ``I_0 and T^{n+1}`` move to R[n+1]; the rest exclude states
first reachable in n+1 steps and are searched for bad states. When every
H[i] is empty the deepest frame that ever held a clause is the
reachability diameter, and no bad state was found, so the property holds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .cnf import Clause, Cnf, evaluate, shift
from .errors import ResourceLimit, UsageError
from .pqe import PqeProblem, nonredundancy_witness, take_out, take_out_enum
from .sat import Solver
from .system import (
    Counterexample,
    Holds,
    Trace,
    TransitionSystem,
    add_stuttering,
    cex_violation,
    negate_cnf,
    remove_stutter_steps,
)


@dataclass
class PpConfig:
    pick_order: str = "fifo"  # or "shortest"
    max_frames: int | None = None  # default 2**k + 1
    seed: int = 0
    sat_budget: int | None = None  # conflicts per SAT call
    pqe_max_nodes: int = 10**7
    pqe_engine: str = "dseq"  # or "enum" for tiny systems
    core_budget: int | None = 16
    shorten: bool = True
    debug: bool = False
    log: Callable[[str], None] | None = None

    def __post_init__(self):
        if self.pick_order not in ("fifo", "shortest"):
            raise UsageError(f"unknown pick order {self.pick_order!r}")
        if self.max_frames is not None and self.max_frames < 1:
            raise UsageError("max_frames must be positive")
        if self.sat_budget is not None and self.sat_budget < 1:
            raise UsageError("sat_budget must be positive")
        if self.pqe_max_nodes < 1:
            raise UsageError("pqe_max_nodes must be positive")


def _kv(**items) -> str:
    return " ".join(f"{k}={v}" for k, v in items.items())


def _lits(c) -> str:
    return "(" + ",".join(map(str, c)) + ")"


class Unrolling:
    """Frame arithmetic and cached unrolled formulas for a stuttered system."""

    def __init__(self, ts: TransitionSystem):
        if not ts.stuttered:
            raise UsageError("unrolling expects a stuttered system")
        self.ts = ts
        self.k = ts.k
        self.w = ts.width
        self._steps = []

    def off(self, j: int) -> int:
        return j * self.w

    def at(self, f, j: int):
        """Clauses over state bits moved into frame j."""
        o = self.off(j)
        return [Clause._trusted(tuple(l + o if l > 0 else l - o for l in c)) for c in f]

    def back(self, c, j: int) -> Clause:
        o = self.off(j)
        return Clause._trusted(tuple(l - o if l > 0 else l + o for l in c))

    def step(self, j: int):
        """Clauses of T between frames j and j+1."""
        while len(self._steps) <= j:
            self._steps.append(shift(self.ts.trans, self.off(len(self._steps))).clauses)
        return self._steps[j]

    def trans_upto(self, n: int):
        out = []
        for j in range(n):
            out.extend(self.step(j))
        return out

    def state_lits(self, s, j: int):
        o = self.off(j)
        return [o + i + 1 if b else -(o + i + 1) for i, b in enumerate(s)]

    def top(self, n: int) -> int:
        """Largest variable of frames 0..n."""
        return self.off(n) + self.k

    def trace_from_model(self, model, n: int) -> Trace:
        k, w = self.k, self.w
        states = tuple(tuple(model.get(self.off(j) + i + 1, False) for i in range(k)) for j in range(n + 1))
        inputs = tuple(
            tuple(model.get(self.off(j) + k + i + 1, False) for i in range(w - k)) for j in range(n)
        )
        return Trace(states, inputs)


def bmc_shortest(ts: TransitionSystem, max_depth: int, seed: int = 0, budget=None) -> Trace | None:
    """Shortest trace of a stuttered system from I to a bad state, searching depths 0..max_depth."""
    u = Unrolling(ts)
    s = Solver(seed=seed, conflict_budget=budget)
    s.ensure_vars(u.top(max_depth))
    for c in u.at(ts.init, 0):
        s.add_clause(c)
    nxt = u.top(max_depth) + 1
    for d in range(max_depth + 1):
        act = nxt
        neg, nxt = negate_cnf(Cnf(u.at(ts.prop, d)), act + 1)
        s.ensure_vars(nxt - 1)
        for c in neg:
            s.add_clause((-act,) + tuple(c))
        r = s.solve([act])
        if r.is_sat:
            return u.trace_from_model(r.model, d)
        s.add_clause([-act])
        if d < max_depth:
            for c in u.step(d):
                s.add_clause(c)
    return None


@dataclass
class PpRun:
    verdict: object
    diameter_bound: int
    stats: dict
    h_retained: dict  # frame -> clauses kept in H after noise removal
    r_final: dict  # frame -> clauses learned into R
    witness: Clause | None = None


class PpChecker:
    """One run of the procedure on a system (stuttering is added if missing)."""

    def __init__(self, ts: TransitionSystem, cfg: PpConfig | None = None):
        self.cfg = cfg or PpConfig()
        self.original = ts
        self.ts = ts if ts.stuttered else add_stuttering(ts)
        self.u = Unrolling(self.ts)
        self.k = ts.k
        self.h = {}
        self.r = {}
        self.h_retained = {}
        self._reach = {}
        self.stats = {"sat_calls": 0, "pqe_calls": 0, "pqe_nodes": 0, "pushes": 0, "frames": 0}
        max_frames = self.cfg.max_frames
        if max_frames is None:
            max_frames = (1 << self.k) + 1
        self.max_frames = max_frames

    # -- helpers -----------------------------------------------------------------

    def _log(self, **items):
        if self.cfg.log is not None:
            self.cfg.log(_kv(**items))

    def _solver(self) -> Solver:
        return Solver(seed=self.cfg.seed, conflict_budget=self.cfg.sat_budget)

    def _solve(self, s: Solver, assumptions=()):
        self.stats["sat_calls"] += 1
        return s.solve(assumptions)

    def reach(self, i: int) -> Solver:
        """Incremental solver holding I_0 and T^i and R[1..i] in their frames."""
        s = self._reach.get(i)
        if s is None:
            s = self._solver()
            s.ensure_vars(self.u.top(i))
            for c in self.u.at(self.ts.init, 0):
                s.add_clause(c)
            for c in self.u.trans_upto(i):
                s.add_clause(c)
            for j in range(1, i + 1):
                for c in self.u.at(self.r.get(j, ()), j):
                    s.add_clause(c)
            self._reach[i] = s
        return s

    def add_r(self, i: int, c: Clause):
        """Record a clause implied by I_0 and T^i in R[i]."""
        if self.cfg.debug:
            s = self._solver()
            s.add_cnf(Cnf(self.u.at(self.ts.init, 0) + self.u.trans_upto(i)))
            if self._solve(s, [-l for l in self.u.at([c], i)[0]]).is_sat:
                raise AssertionError(f"clause {_lits(c)} is not implied at frame {i}")
        self.r.setdefault(i, []).append(c)
        fc = self.u.at([c], i)[0]
        for depth, s in self._reach.items():
            if depth >= i:
                s.add_clause(fc)

    # -- building blocks ---------------------------------------------------------

    def bad_initial(self) -> Trace | None:
        """A bad initial state as a zero-step trace."""
        s = self._solver()
        s.add_cnf(self.ts.init)
        neg, _ = negate_cnf(self.ts.prop, self.k + 1)
        for c in neg:
            s.add_clause(c)
        r = self._solve(s)
        if not r.is_sat:
            return None
        st = tuple(r.model.get(i, False) for i in range(1, self.k + 1))
        return Trace((st,), ())

    def check_one_step_bad(self) -> Trace | None:
        """Trace of one (possibly stuttering) step from I to a bad state."""
        u = self.u
        s = self._solver()
        s.ensure_vars(u.top(1))
        for c in u.at(self.ts.init, 0) + list(u.step(0)):
            s.add_clause(c)
        neg, _ = negate_cnf(Cnf(u.at(self.ts.prop, 1)), u.top(1) + 1)
        for c in neg:
            s.add_clause(c)
        r = self._solve(s)
        return u.trace_from_model(r.model, 1) if r.is_sat else None

    def push_clause(self, c: Clause, n: int) -> list:
        """Take C (over frame n) out of the quantifiers; returns clauses over frame n+1.

        The caller has already removed C from H[n].
        """
        u = self.u
        b = u.at(self.ts.init, 0)
        for j in range(1, n + 1):
            b += u.at(self.h.get(j, ()), j)
        b += u.trans_upto(n + 1)
        top = u.top(n + 1)
        lo = u.off(n + 1)
        free = frozenset(range(lo + 1, top + 1))
        quantified = frozenset(range(1, lo + 1))
        prob = PqeProblem(Cnf(u.at([c], n), top), Cnf(b, top), quantified, free)
        if self.cfg.pqe_engine == "enum":
            sol = take_out_enum(prob)
        else:
            sol = take_out(prob, max_nodes=self.cfg.pqe_max_nodes, core_budget=self.cfg.core_budget, seed=self.cfg.seed)
        self.stats["pqe_calls"] += 1
        self.stats["pqe_nodes"] += sol.stats.nodes
        self.stats["sat_calls"] += sol.stats.sat_calls
        return [u.back(d, n + 1) for d in sol.a_star]

    def rem_noise(self, i: int):
        """Move clauses of H[i] implied by I_0, T^i and R[1..i] into R[i].

        The clause recorded in R[i] is the failed-assumption core, which is
        a sub-clause of the one removed from H[i].
        """
        keep = []
        s = self.reach(i)
        for c in self.h.get(i, ()):
            fc = self.u.at([c], i)[0]
            r = self._solve(s, [-l for l in fc])
            if r.is_sat:
                keep.append(c)
            else:
                core = Clause(-l for l in r.core) if r.core else fc
                self.add_r(i, self.u.back(core, i))
        self.h[i] = keep
        if keep:
            self.h_retained.setdefault(i, []).extend(keep)

    def chk_bad_st(self, i: int) -> Trace | None:
        """Search the states excluded by H[i] for a bad state reachable in i steps."""
        k = self.k
        neg_p, nxt = negate_cnf(self.ts.prop, k + 1)
        if any(len(c) == 0 for c in neg_p):
            return None
        reach = self.reach(i)
        for c in list(self.h.get(i, ())):
            small = self._solver()
            small.ensure_vars(max(k, nxt - 1))
            for d in neg_p:
                small.add_clause(d)
            for d in self.r.get(i, ()):
                small.add_clause(d)
            while True:
                r = self._solve(small, [-l for l in c])
                if not r.is_sat:
                    break
                st = tuple(r.model.get(v, False) for v in range(1, k + 1))
                lits = self.u.state_lits(st, i)
                rr = self._solve(reach, lits)
                if rr.is_sat:
                    return self.u.trace_from_model(rr.model, i)
                core = Clause(-l for l in rr.core)
                cstar = self.u.back(core, i)
                self.add_r(i, cstar)
                small.add_clause(cstar)
                self._log(event="learn", frame=i, clause=_lits(cstar))
        return None

    def _pick(self, hs: list) -> Clause:
        if self.cfg.pick_order == "shortest":
            best = min(range(len(hs)), key=lambda j: (len(hs[j]), j))
            return hs.pop(best)
        return hs.pop(0)

    # -- main loop ---------------------------------------------------------------

    def run(self) -> PpRun:
        bad0 = self.bad_initial()
        if bad0 is not None:
            return self._finish(Counterexample(bad0), 0, already_plain=True)
        one = self.check_one_step_bad()
        if one is not None:
            return self._finish(Counterexample(one), 0)
        self.h[1] = list(self.ts.init.clauses)
        self.rem_noise(1)
        n = 1
        best = 1 if self.h[1] else 0
        self._log(event="frame", n=1, h=len(self.h[1]), r=len(self.r.get(1, ())))
        while n >= 1:
            if not self.h.get(n):
                n -= 1
                continue
            if n + 1 > self.max_frames:
                raise ResourceLimit(f"frame limit {self.max_frames} exceeded", dict(self.stats))
            c = self._pick(self.h[n])
            self.stats["pushes"] += 1
            self.h[n + 1] = self.push_clause(c, n)
            pushed = len(self.h[n + 1])
            self.rem_noise(n + 1)
            self._log(
                event="push",
                frame=n,
                clause=_lits(c),
                derived=pushed,
                kept=len(self.h[n + 1]),
                r=len(self.r.get(n + 1, ())),
                sat_calls=self.stats["sat_calls"],
                pqe_nodes=self.stats["pqe_nodes"],
            )
            if not self.h[n + 1]:
                continue
            tr = self.chk_bad_st(n + 1)
            if tr is not None:
                return self._finish(Counterexample(tr), best)
            n += 1
            best = max(best, n)
            self.stats["frames"] = best
        self._log(event="holds", diameter=best)
        return self._finish(Holds(best), best)

    def _finish(self, verdict, best, already_plain=False) -> PpRun:
        if isinstance(verdict, Counterexample):
            if self.original.stuttered:
                raise UsageError("counterexamples are reported for systems without stuttering")
            tr = verdict.trace
            if not already_plain:
                if self.cfg.shorten:
                    short = bmc_shortest(self.ts, tr.length, self.cfg.seed, self.cfg.sat_budget)
                    if short is not None:
                        tr = short
                tr = truncate_at_first_bad(self.original, remove_stutter_steps(tr))
            why = cex_violation(self.original, tr)
            if why is not None:
                raise AssertionError(f"internal error: emitted trace is not a counterexample ({why})")
            verdict = Counterexample(tr)
            self._log(event="cex", length=tr.length)
        return PpRun(verdict, best, dict(self.stats), self.h_retained, self.r)


def truncate_at_first_bad(ts: TransitionSystem, tr: Trace) -> Trace:
    for i, s in enumerate(tr.states):
        if not evaluate(ts.prop, {j + 1: b for j, b in enumerate(s)}):
            return Trace(tr.states[: i + 1], tr.inputs[:i] if tr.inputs is not None else None)
    return tr


def shorten_counterexample(ts: TransitionSystem, tr: Trace, cfg: PpConfig | None = None) -> Trace:
    """Replace a counterexample of an unstuttered system by a shortest one."""
    cfg = cfg or PpConfig()
    short = bmc_shortest(add_stuttering(ts), tr.length, cfg.seed, cfg.sat_budget)
    if short is None:
        return tr
    return truncate_at_first_bad(ts, remove_stutter_steps(short))


def run_pp(ts: TransitionSystem, cfg: PpConfig | None = None) -> PpRun:
    return PpChecker(ts, cfg).run()


def prove_property(ts: TransitionSystem, cfg: PpConfig | None = None):
    """Holds(diameter) or Counterexample(trace over the unstuttered system)."""
    return run_pp(ts, cfg).verdict


def compute_diameter(ts: TransitionSystem, cfg: PpConfig | None = None) -> int:
    """Reachability diameter, from a run with the property made constant true."""
    v = prove_property(ts.with_prop(Cnf((), ts.k)), cfg)
    return v.diameter


def _redundancy_problem(ts: TransitionSystem, n: int, with_bad: bool) -> PqeProblem:
    if n < 0:
        raise UsageError("n must be non-negative")
    st = ts if ts.stuttered else add_stuttering(ts)
    u = Unrolling(st)
    top = u.top(n + 1)
    lo = u.off(n + 1)
    b = u.at(st.init, 0) + u.trans_upto(n + 1)
    extra = top
    if with_bad:
        neg, nxt = negate_cnf(Cnf(u.at(st.prop, n + 1)), top + 1)
        b += neg
        extra = max(top, nxt - 1)
    free = frozenset(range(lo + 1, top + 1))
    quantified = frozenset(range(1, extra + 1)) - free
    return PqeProblem(Cnf(u.at(st.init, 1), extra), Cnf(b, extra), quantified, free)


def check_diameter_step(ts: TransitionSystem, n: int, witness: bool = False, cfg: PpConfig | None = None):
    """Whether I_1 is redundant in ``exists S^n [I_0 and I_1 and T^{n+1}]``.

    This holds exactly when every reachable state is reachable in at most n
    steps. With ``witness`` the result is ``(redundant, clause)`` where the
    clause, when present, is implied by I_0, I_1 and T^{n+1} while
    I_0 and T^{n+1} admit a trace falsifying it.
    """
    cfg = cfg or PpConfig()
    c = nonredundancy_witness(
        _redundancy_problem(ts, n, False), max_nodes=cfg.pqe_max_nodes, core_budget=cfg.core_budget, seed=cfg.seed
    )
    if cfg.log is not None and c is not None:
        cfg.log(_kv(event="witness", frame=n + 1, clause=_lits(c)))
    return (c is None, c) if witness else c is None


def check_bad_step(ts: TransitionSystem, n: int, cfg: PpConfig | None = None) -> bool:
    """Whether I_1 is redundant in ``exists S^n [I_0 and I_1 and T^{n+1} and not P_{n+1}]``.

    True exactly when no bad state has minimum depth n+1.
    """
    cfg = cfg or PpConfig()
    c = nonredundancy_witness(
        _redundancy_problem(ts, n, True), max_nodes=cfg.pqe_max_nodes, core_budget=cfg.core_budget, seed=cfg.seed
    )
    return c is None
