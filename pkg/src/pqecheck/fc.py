"""Proving with an expanded initial-state set.

The run starts from ``I_exp = P`` and repeatedly calls the property prover
with ``I_exp`` as the initial states. A counterexample whose first state
satisfies the real I is genuine. Otherwise its first state is cut out of
``I_exp`` by a clause implied by I, and the prover runs again. ``I_exp``
only shrinks and always satisfies ``I => I_exp => P``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cnf import Clause, Cnf, evaluate, longest_falsified_clause
from .errors import ResourceLimit, UsageError
from .pp import PpConfig, run_pp, shorten_counterexample
from .sat import Solver
from .system import Counterexample, Trace, TransitionSystem, negate_cnf


@dataclass(frozen=True)
class ExpandedInit:
    formula: Cnf
    exclusion_count: int = 0


@dataclass
class FcConfig:
    pp: PpConfig = field(default_factory=PpConfig)
    drop_literals: bool = True
    drop_budget: int | None = None  # SAT calls per exclusion clause
    multi_state: bool = False
    max_iterations: int | None = None


@dataclass
class FcIteration:
    excluded: tuple
    clause: Clause
    i_implies_exp: bool
    exp_implies_p: bool
    pp_stats: dict


@dataclass
class FcRun:
    verdict: object
    iterations: list
    final: ExpandedInit
    initial_checks: tuple  # (I => I_exp, I_exp => P) before the first iteration


def _entails(f: Cnf, g: Cnf, k: int, seed: int = 0) -> bool:
    """Whether every model of f (over state bits) satisfies g."""
    s = Solver(seed=seed)
    s.ensure_vars(k)
    s.add_cnf(f)
    neg, _ = negate_cnf(g, k + 1)
    for c in neg:
        s.add_clause(c)
    return not s.solve().is_sat


def _implies_clause(f: Cnf, c, seed: int = 0) -> bool:
    s = Solver(seed=seed)
    s.add_cnf(f)
    return not s.solve([-l for l in c]).is_sat


def invariant_status(ie: ExpandedInit, ts: TransitionSystem) -> tuple:
    """(I => I_exp, I_exp => P)."""
    return _entails(ts.init, ie.formula, ts.k), _entails(ie.formula, ts.prop, ts.k)


def initial_expansion(ts: TransitionSystem) -> ExpandedInit:
    """``I_exp = P``; requires that every initial state is good."""
    if not _entails(ts.init, ts.prop, ts.k):
        raise UsageError("an initial state violates the property")
    return ExpandedInit(Cnf(ts.prop, ts.k), 0)


def _state(s) -> dict:
    return {i + 1: bool(b) for i, b in enumerate(s)}


def _drop_literals(c: Clause, init: Cnf, budget) -> Clause:
    lits = list(c)
    calls = 0
    for l in sorted(c, key=abs):
        if len(lits) == 1 or (budget is not None and calls >= budget):
            break
        trial = [x for x in lits if x != l]
        calls += 1
        if _implies_clause(init, trial):
            lits = trial
    return Clause(lits)


def exclude_state(
    ie: ExpandedInit,
    s0,
    ts: TransitionSystem,
    drop_literals: bool = True,
    budget: int | None = None,
    also=None,
) -> tuple:
    """Conjoin I_exp with a clause C implied by I and falsified by ``s0``.

    C starts as the longest clause falsified by s0 and loses literals in
    ascending variable order while I still implies it. With ``also`` (a
    second state) the clause is first tried on the variables where both
    states agree so that it cuts out both. Returns ``(new ExpandedInit, C)``.
    """
    a0 = _state(s0)
    if evaluate(ts.init, a0):
        raise UsageError("cannot exclude an initial state")
    if not evaluate(ie.formula, a0):
        raise UsageError("state is already outside the expanded initial set")
    c = longest_falsified_clause(a0)
    if also is not None:
        a1 = _state(also)
        shared = Clause(l for l in c if a1[abs(l)] == a0[abs(l)])
        if shared and _implies_clause(ts.init, shared):
            c = shared
    if drop_literals:
        c = _drop_literals(c, ts.init, budget)
    formula = Cnf(ie.formula.clauses + (c,), ts.k)
    return ExpandedInit(formula, ie.exclusion_count + 1), c


def _second_start(ts: TransitionSystem, ie: ExpandedInit, tr: Trace):
    """Another state of I_exp outside I with a step to the trace's second state."""
    if tr.length < 1:
        return None
    k, m = ts.k, ts.m
    s = Solver()
    s.ensure_vars(2 * k + m)
    s.add_cnf(ie.formula)
    s.add_cnf(ts.trans)
    neg, _ = negate_cnf(ts.init, 2 * k + m + 1)
    for c in neg:
        s.add_clause(c)
    s.add_clause(longest_falsified_clause(_state(tr.states[0])))
    nxt = [(k + m + i + 1) if b else -(k + m + i + 1) for i, b in enumerate(tr.states[1])]
    r = s.solve(nxt)
    if not r.is_sat:
        return None
    return tuple(r.model.get(i, False) for i in range(1, k + 1))


def fc_prove(ts: TransitionSystem, cfg: FcConfig | None = None) -> FcRun:
    cfg = cfg or FcConfig()
    if ts.stuttered:
        raise UsageError("expects a system without stuttering")
    log = cfg.pp.log
    bad = _bad_initial(ts)
    if bad is not None:
        tr = Trace((bad,), ())
        return FcRun(Counterexample(tr), [], ExpandedInit(Cnf(ts.prop, ts.k)), (True, False))
    ie = initial_expansion(ts)
    initial = invariant_status(ie, ts)
    iterations = []
    while True:
        if cfg.max_iterations is not None and len(iterations) >= cfg.max_iterations:
            raise ResourceLimit(f"iteration limit {cfg.max_iterations} reached")
        run = run_pp(ts.with_init(ie.formula), cfg.pp)
        v = run.verdict
        if v.holds:
            if log:
                log(f"event=fc_holds iterations={len(iterations)} diameter={v.diameter}")
            return FcRun(v, iterations, ie, initial)
        tr = v.trace
        s0 = tr.states[0]
        if evaluate(ts.init, _state(s0)):
            tr = shorten_counterexample(ts, tr, cfg.pp) if cfg.pp.shorten else tr
            if log:
                log(f"event=fc_cex iterations={len(iterations)} length={tr.length}")
            return FcRun(Counterexample(tr), iterations, ie, initial)
        also = _second_start(ts, ie, tr) if cfg.multi_state else None
        ie, c = exclude_state(ie, s0, ts, cfg.drop_literals, cfg.drop_budget, also)
        ok_i, ok_p = invariant_status(ie, ts)
        iterations.append(FcIteration(tuple(s0), c, ok_i, ok_p, run.stats))
        if log:
            bits = "".join("1" if b else "0" for b in s0)
            log(
                f"event=fc_exclude iteration={len(iterations)} state={bits} "
                f"clause=({','.join(map(str, c))}) i_implies_exp={int(ok_i)} exp_implies_p={int(ok_p)}"
            )
        if not (ok_i and ok_p):
            raise AssertionError("expanded initial set lost its invariant")


def _bad_initial(ts: TransitionSystem):
    s = Solver()
    s.ensure_vars(ts.k)
    s.add_cnf(ts.init)
    neg, _ = negate_cnf(ts.prop, ts.k + 1)
    for c in neg:
        s.add_clause(c)
    r = s.solve()
    if not r.is_sat:
        return None
    return tuple(r.model.get(i, False) for i in range(1, ts.k + 1))


def fc_verdict(ts: TransitionSystem, cfg: FcConfig | None = None):
    return fc_prove(ts, cfg).verdict
