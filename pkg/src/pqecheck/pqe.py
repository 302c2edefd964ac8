"""Partial quantifier elimination: take A out of ``exists W [A and B]``.

Given a problem (A, B, W, V) the engine produces a formula A*(V) with

    exists W [A and B]  ==  A* and exists W [B]

Every clause of A* is implied by A and B, and at the moment it is derived
it is not implied by B together with the previously derived clauses.

The search branches on free variables only. A node is a partial assignment
q over V. The node is closed by a D-sequent stating that A is redundant in
a subspace contained in q:

* every clause of A is trivially redundant in q (satisfied, subsumed by
  another active clause, or blocked on an unassigned quantified variable);
* A and B are satisfiable under q and the model lifts to a cube of q, so
  every point of the cube has a witness for A and B;
* B and A* are unsatisfiable under a core of q;
* A and B are unsatisfiable under a core of q while B is not, in which case
  the negated core is a new clause of A*.

Sibling subspaces are combined with :func:`join`. When a child's subspace
does not mention the branch variable it covers the parent directly and the
second branch is skipped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .cnf import Clause, Cnf, make_clause, resolve, simplify
from .errors import ParseError, PqeTimeout, UsageError
from .sat import Solver


@dataclass(frozen=True)
class PqeProblem:
    a: Cnf
    b: Cnf
    quantified: frozenset
    free: frozenset

    def __post_init__(self):
        if self.quantified & self.free:
            both = sorted(self.quantified & self.free)
            raise UsageError(f"variables {both} are both quantified and free")
        stray = (self.a.vars | self.b.vars) - self.quantified - self.free
        if stray:
            raise UsageError(f"variables {sorted(stray)} are neither quantified nor free")

    @classmethod
    def make(cls, a, b, quantified: Iterable[int], free: Iterable[int] | None = None):
        """Build a problem; ``free`` defaults to every non-quantified variable of A and B."""
        a = a if isinstance(a, Cnf) else Cnf(a)
        b = b if isinstance(b, Cnf) else Cnf(b)
        quantified = frozenset(quantified)
        if free is None:
            free = (a.vars | b.vars) - quantified
        return cls(a, b, quantified, frozenset(free))

    @property
    def num_vars(self) -> int:
        return max(self.a.num_vars, self.b.num_vars, max(self.quantified | self.free, default=0))


@dataclass(frozen=True)
class DSequent:
    """Clause ``clause`` is redundant in the subspace ``subspace``.

    The subspace is stored as a sorted tuple of ``(var, value)`` pairs; an
    empty subspace means unconditional redundancy.
    """

    subspace: tuple
    clause: Clause

    @classmethod
    def make(cls, subspace: Mapping[int, bool], clause):
        return cls(tuple(sorted(subspace.items())), Clause(clause))

    @property
    def q(self) -> dict:
        return dict(self.subspace)

    @property
    def unconditional(self) -> bool:
        return not self.subspace


@dataclass
class PqeStats:
    nodes: int = 0
    branches: int = 0
    joins: int = 0
    backjumps: int = 0
    resolvents: int = 0
    sat_calls: int = 0
    trivial: int = 0
    lifted: int = 0

    def as_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass(frozen=True)
class PqeSolution:
    a_star: Cnf
    stats: PqeStats = field(default_factory=PqeStats, compare=False)


# -- D-sequent primitives ----------------------------------------------------


def join(d1: DSequent, d2: DSequent, v: int) -> DSequent:
    """Combine D-sequents derived in the branches v=0 and v=1."""
    if d1.clause != d2.clause:
        raise UsageError("join needs D-sequents for the same clause")
    return DSequent(_join_subspaces(d1.q, d2.q, v), d1.clause)


def _join_subspaces(q0: Mapping[int, bool], q1: Mapping[int, bool], v: int) -> tuple:
    if q0.get(v) is not False or q1.get(v) is not True:
        raise UsageError(f"join on {v} needs {v}=0 in the first and {v}=1 in the second subspace")
    out = dict(q0)
    for u, val in q1.items():
        if u != v and u in out and out[u] != val:
            raise UsageError(f"subspaces disagree on variable {u}")
        out[u] = val
    del out[v]
    return tuple(sorted(out.items()))


def add_conflict_resolvent(c0: Clause, c1: Clause, y: int) -> Clause:
    """Resolvent of clauses falsified in the branches y=0 and y=1."""
    r = resolve(c0, c1, y)
    if r is None:
        raise UsageError(f"clauses falsified in opposite branches of {y} gave a tautology")
    return r


def detect_trivial_redundancy(
    c: Clause,
    subspace: Mapping[int, bool],
    active_clauses: Iterable[Clause],
    w: Iterable[int],
) -> DSequent | None:
    """D-sequent for ``c`` if it is satisfied, subsumed or blocked in ``subspace``.

    ``active_clauses`` are the clauses not yet proved redundant; ``c`` itself
    may be among them. The returned subspace holds only the assignments that
    the condition depends on.
    """
    q = subspace
    for l in c:
        val = q.get(abs(l))
        if val is not None and val == (l > 0):
            return DSequent(((abs(l), val),), c)
    active = [d for d in active_clauses if d != c]
    c_free = {l for l in c if abs(l) not in q}
    live = []
    for d in active:
        falsified = []
        sat = False
        for l in d:
            val = q.get(abs(l))
            if val is None:
                continue
            if val == (l > 0):
                sat = True
                break
            falsified.append(abs(l))
        if sat:
            continue
        live.append(d)
        rest = {l for l in d if abs(l) not in q}
        if rest <= c_free:
            return DSequent(tuple(sorted((u, q[u]) for u in falsified)), c)
    wset = set(w)
    for l in sorted(c_free, key=abs):
        if abs(l) not in wset:
            continue
        if any(-l in d for d in live):
            continue
        resp = {}
        for d in active:
            if -l in d:
                for x in d:
                    val = q.get(abs(x))
                    if val is not None and val == (x > 0):
                        resp[abs(x)] = val
                        break
        return DSequent(tuple(sorted(resp.items())), c)
    return None


# -- the engine ----------------------------------------------------------------


class _Engine:
    def __init__(self, problem: PqeProblem, max_nodes, core_budget, stop_at_first, seed):
        self.p = problem
        self.max_nodes = max_nodes
        self.core_budget = core_budget
        self.stop_at_first = stop_at_first
        self.stats = PqeStats()
        self.free = problem.free
        self.a = list(problem.a)
        self.b = list(problem.b)
        self.a_star = []
        top = problem.num_vars
        self.sel = top + 1
        s = Solver(seed=seed)
        s.ensure_vars(self.sel)
        for c in self.b:
            s.add_clause(c)
        for c in self.a:
            s.add_clause((-self.sel,) + tuple(c))
        self.solver = s
        self.w = problem.quantified
        # clauses used when lifting a model to a cube over the free variables
        self._lift_clauses = [c for c in self.a + self.b if any(abs(l) in self.free for l in c)]
        self._occ = {}
        for i, c in enumerate(self.a + self.b):
            for l in c:
                self._occ.setdefault(l, []).append(i)

    def _solve(self, assumptions):
        self.stats.sat_calls += 1
        return self.solver.solve(assumptions)

    def run(self):
        self._node({}, None)
        return self.a_star

    def _node(self, q: dict, hint):
        """Close the node ``q``; return the subspace (dict) the proof depends on."""
        st = self.stats
        st.nodes += 1
        if st.nodes > self.max_nodes:
            raise PqeTimeout(f"node budget {self.max_nodes} exhausted", st.as_dict())
        if hint is not None and all(q.get(v) == val for v, val in hint.items()):
            st.lifted += 1
            return hint
        triv = self._trivial(q)
        if triv is not None:
            st.trivial += 1
            return triv
        qlits = [v if val else -v for v, val in sorted(q.items())]
        r = self._solve(qlits + [self.sel])
        if r.is_sat:
            cube = self._lift(r.model, q)
            if all(v in q for v in cube):
                st.lifted += 1
                return cube
            v = min(u for u in cube if u not in q)
            return self._branch(q, v, cube[v], cube)
        core = [l for l in r.core if l != self.sel]
        if self.sel not in r.core:
            return {abs(l): l > 0 for l in core}
        r2 = self._solve(qlits)
        if not r2.is_sat:
            return {abs(l): l > 0 for l in r2.core}
        core = self._minimize(core)
        clause = Clause(-l for l in core)
        self.a_star.append(clause)
        self.solver.add_clause(clause)
        st.resolvents += 1
        if self.stop_at_first:
            raise _Found(clause)
        return {abs(l): l > 0 for l in core}

    def _branch(self, q, v, first, hint):
        st = self.stats
        st.branches += 1
        q[v] = first
        try:
            s0 = self._node(q, hint)
        finally:
            del q[v]
        if v not in s0:
            st.backjumps += 1
            return s0
        q[v] = not first
        try:
            s1 = self._node(q, None)
        finally:
            del q[v]
        if v not in s1:
            st.backjumps += 1
            return s1
        st.joins += 1
        lo, hi = (s0, s1) if not first else (s1, s0)
        return dict(_join_subspaces(lo, hi, v))

    def _minimize(self, core):
        core = sorted(core, key=abs)
        budget = self.core_budget
        i = 0
        tries = 0
        while len(core) > 1 and i < len(core) and (budget is None or tries < budget):
            cand = core[:i] + core[i + 1 :]
            tries += 1
            r = self._solve(cand + [self.sel])
            if r.is_sat:
                i += 1
            else:
                core = [l for l in cand if l in r.core]
        return core

    def _lift(self, model, q):
        """Cube over free variables on which the model's quantified part works everywhere."""
        free = self.free
        cube = {}
        for c in self._lift_clauses:
            best = None
            done = False
            for l in c:
                u = abs(l)
                if model.get(u) != (l > 0):
                    continue
                if u not in free:
                    done = True
                    break
                if u in cube:
                    done = True
                    break
                if best is None or (u in q and best[0] not in q):
                    best = (u, l > 0)
            if not done:
                cube[best[0]] = best[1]
        return cube

    def _trivial(self, q):
        """Subspace in which every clause of A is trivially redundant, or None."""
        n_a = len(self.a)
        allc = self.a + self.b
        removed = set()
        resp = {}
        occ = self._occ
        w = self.w

        def satisfied(c):
            for l in c:
                val = q.get(abs(l))
                if val is not None and val == (l > 0):
                    return l
            return None

        for i in range(n_a):
            c = allc[i]
            l = satisfied(c)
            if l is not None:
                resp[abs(l)] = l > 0
                removed.add(i)
                continue
            ok = False
            for l in c:
                if abs(l) not in w:
                    continue
                blockers = occ.get(-l, ())
                local = {}
                for j in blockers:
                    if j in removed:
                        continue
                    x = satisfied(allc[j])
                    if x is None:
                        break
                    local[abs(x)] = x > 0
                else:
                    resp.update(local)
                    ok = True
                    break
            if not ok:
                return None
            removed.add(i)
        return resp


class _Found(Exception):
    def __init__(self, clause):
        self.clause = clause


def take_out(
    problem: PqeProblem,
    max_nodes: int = 10**7,
    core_budget: int | None = 16,
    seed: int = 0,
) -> PqeSolution:
    """Compute A* for the problem; raises PqeTimeout when the node budget runs out."""
    if not problem.a.clauses:
        return PqeSolution(Cnf((), problem.num_vars))
    eng = _Engine(problem, max_nodes, core_budget, False, seed)
    clauses = simplify(eng.run())
    return PqeSolution(Cnf(clauses, problem.num_vars), eng.stats)


def nonredundancy_witness(
    problem: PqeProblem,
    max_nodes: int = 10**7,
    core_budget: int | None = 16,
    seed: int = 0,
):
    """A clause C over V implied by A and B with B and not C satisfiable, or None if A is redundant."""
    if not problem.a.clauses:
        return None
    eng = _Engine(problem, max_nodes, core_budget, True, seed)
    try:
        eng.run()
    except _Found as f:
        return f.clause
    return None


def is_redundant(problem: PqeProblem, **kw) -> bool:
    """True iff exists W [A and B] is equivalent to exists W [B]."""
    return nonredundancy_witness(problem, **kw) is None


def take_out_enum(problem: PqeProblem, max_free: int = 24) -> PqeSolution:
    """Reference A* by enumerating free assignments.

    Points where B has a witness but A and B do not are covered by clauses
    that stay true on every point where A and B have a witness.
    """
    import numpy as np

    from .oracle import cover_points, exists_table

    free = sorted(problem.free)
    if len(free) > max_free:
        raise UsageError(f"{len(free)} free variables exceed the enumeration bound {max_free}")
    ab = exists_table(problem.a & problem.b, free)
    b = exists_table(problem.b, free)
    clauses = cover_points(np.flatnonzero(b & ~ab), np.flatnonzero(ab), free)
    stats = PqeStats(resolvents=len(clauses))
    return PqeSolution(Cnf(simplify(clauses), problem.num_vars), stats)


# -- .pqe files ------------------------------------------------------------------


def parse_pqe(text: str) -> PqeProblem:
    """Read the ``p pqe <nvars> <nA> <nB>`` format (quantified vars on an ``e`` line)."""
    header = None
    quantified = None
    clauses = []
    cur = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if header is not None:
                raise ParseError("duplicate header", lineno, 1)
            if len(parts) != 5 or parts[1] != "pqe":
                raise ParseError("bad header, expected 'p pqe <vars> <nA> <nB>'", lineno, 1)
            try:
                header = tuple(int(x) for x in parts[2:])
            except ValueError:
                raise ParseError("non-integer header field", lineno, 1) from None
            if min(header) < 0:
                raise ParseError("negative header field", lineno, 1)
            continue
        if header is None:
            raise ParseError("content before header", lineno, 1)
        if line.startswith("e"):
            if quantified is not None:
                raise ParseError("duplicate quantifier line", lineno, 1)
            toks = line.split()[1:]
            if not toks or toks[-1] != "0":
                raise ParseError("quantifier line must end with 0", lineno, len(raw))
            quantified = []
            for tok in toks[:-1]:
                try:
                    v = int(tok)
                except ValueError:
                    raise ParseError(f"bad variable {tok!r}", lineno, raw.find(tok) + 1) from None
                if not 1 <= v <= header[0]:
                    raise ParseError(f"variable {v} out of range", lineno, raw.find(tok) + 1)
                quantified.append(v)
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno, raw.find(tok) + 1) from None
            if abs(lit) > header[0]:
                raise ParseError(f"literal {lit} out of range", lineno, raw.find(tok) + 1)
            if lit == 0:
                clauses.append(cur)
                cur = []
            else:
                cur.append(lit)
    if header is None:
        raise ParseError("missing 'p pqe' header")
    if cur:
        raise ParseError("unterminated clause at end of input")
    nvars, na, nb = header
    if len(clauses) != na + nb:
        raise ParseError(f"expected {na + nb} clauses, found {len(clauses)}")

    def build(group):
        out = []
        for c in group:
            cl = make_clause(c)
            if cl is not None:
                out.append(cl)
        return Cnf(out, nvars)

    a = build(clauses[:na])
    b = build(clauses[na:])
    q = frozenset(quantified or ())
    free = frozenset(range(1, nvars + 1)) - q
    return PqeProblem(a, b, q, free)


def format_pqe(problem: PqeProblem) -> str:
    n = problem.num_vars
    lines = [f"p pqe {n} {len(problem.a)} {len(problem.b)}"]
    lines.append("e " + "".join(f"{v} " for v in sorted(problem.quantified)) + "0")
    for c in list(problem.a) + list(problem.b):
        lines.append("".join(f"{l} " for l in c) + "0")
    return "\n".join(lines) + "\n"
