"""Transition systems (I, T, P) over CNF, traces, and time-frame unrolling.

Variable layout of a system with ``k`` state bits and ``m`` inputs:

* present state ``1..k``
* inputs ``k+1..k+m``
* next state ``k+m+1..k+m+k``

Frame ``j`` of an unrolling uses offset ``j*(k+m)``: its state bits are
``j*(k+m)+1..j*(k+m)+k`` and the inputs driving the step from frame ``j``
to ``j+1`` follow directly after. Shifting T by ``j*(k+m)`` therefore lands
its next-state bits exactly on frame ``j+1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .cnf import Clause, Cnf, cofactor, evaluate, make_clause, shift
from .errors import ParseError, UsageError
from .sat import Solver


@dataclass(frozen=True)
class TransitionSystem:
    k: int
    m: int
    init: Cnf
    trans: Cnf
    prop: Cnf
    stuttered: bool = False

    def __post_init__(self):
        if self.k < 1:
            raise UsageError("a system needs at least one state bit")
        if self.m < 0:
            raise UsageError("negative input count")
        k, m = self.k, self.m
        _check_range(self.init, k, "init")
        _check_range(self.prop, k, "property")
        _check_range(self.trans, 2 * k + m, "trans")
        if self.stuttered and m < 1:
            raise UsageError("a stuttered system carries the stutter input")

    @property
    def width(self) -> int:
        """Variables per time frame (state bits plus inputs)."""
        return self.k + self.m

    @property
    def state_vars(self) -> range:
        return range(1, self.k + 1)

    @property
    def input_vars(self) -> range:
        return range(self.k + 1, self.k + self.m + 1)

    @property
    def next_vars(self) -> range:
        return range(self.k + self.m + 1, 2 * self.k + self.m + 1)

    @property
    def stutter_var(self) -> int:
        """The stutter input (the last input); 0 selects the frozen step."""
        if not self.stuttered:
            raise UsageError("system has no stutter input")
        return self.k + self.m

    def add_stuttering(self) -> "TransitionSystem":
        return add_stuttering(self)

    def with_init(self, init: Cnf) -> "TransitionSystem":
        return TransitionSystem(self.k, self.m, Cnf(init, self.k), self.trans, self.prop, self.stuttered)

    def with_prop(self, prop: Cnf) -> "TransitionSystem":
        return TransitionSystem(self.k, self.m, self.init, self.trans, Cnf(prop, self.k), self.stuttered)


def _check_range(f: Cnf, top: int, section: str):
    for c in f:
        for l in c:
            if abs(l) > top:
                raise UsageError(f"literal {l} out of range in {section} section (max {top})")


def add_stuttering(ts: TransitionSystem) -> TransitionSystem:
    """Append an input v with v=0 forcing next state = present state."""
    if ts.stuttered:
        raise UsageError("system is already stuttered")
    k, m = ts.k, ts.m
    v = k + m + 1
    first_next = k + m + 1
    clauses = []
    for c in ts.trans:
        lits = [l + 1 if l > 0 and l >= first_next else (l - 1 if l < 0 and -l >= first_next else l) for l in c]
        clauses.append(Clause([-v] + lits))
    for i in range(1, k + 1):
        nxt = k + m + 1 + i
        clauses.append(Clause([v, -i, nxt]))
        clauses.append(Clause([v, i, -nxt]))
    return TransitionSystem(k, m + 1, ts.init, Cnf(clauses, 2 * k + m + 1), ts.prop, True)


def strip_stuttering(ts: TransitionSystem, original_m: int) -> TransitionSystem:
    """Inverse of :func:`add_stuttering` for systems built by it."""
    if not ts.stuttered:
        raise UsageError("system is not stuttered")
    k, m = ts.k, ts.m
    v = k + m
    first_next = k + m + 1
    clauses = []
    for c in ts.trans:
        if -v not in c:
            continue
        lits = [l for l in c if l != -v]
        lits = [l - 1 if l > 0 and l >= first_next else (l + 1 if l < 0 and -l >= first_next else l) for l in lits]
        clauses.append(Clause(lits))
    return TransitionSystem(k, original_m, ts.init, Cnf(clauses, 2 * k + original_m), ts.prop, False)


# -- unrolling ------------------------------------------------------------------


@dataclass(frozen=True)
class FrameMap:
    """Frame j occupies variables ``j*width+1 .. j*width+width``."""

    k: int
    m: int
    frames: int  # frames 0..frames-1 exist

    @property
    def width(self) -> int:
        return self.k + self.m

    def _check(self, j):
        if not 0 <= j < self.frames:
            raise UsageError(f"frame {j} outside 0..{self.frames - 1}")

    def offset(self, j: int) -> int:
        self._check(j)
        return j * self.width

    def state_vars(self, j: int) -> range:
        o = self.offset(j)
        return range(o + 1, o + self.k + 1)

    def input_vars(self, j: int) -> range:
        """Inputs of the step leaving frame j (not part of the last frame)."""
        if j >= self.frames - 1:
            raise UsageError(f"frame {j} has no outgoing step")
        o = self.offset(j)
        return range(o + self.k + 1, o + self.width + 1)

    @property
    def num_vars(self) -> int:
        return (self.frames - 1) * self.width + self.k


def frame_map(ts: TransitionSystem, frames: int) -> FrameMap:
    return FrameMap(ts.k, ts.m, frames)


def unroll(ts: TransitionSystem, n: int):
    """T^n over frames 0..n and its frame map."""
    if n < 0:
        raise UsageError("frame count must be non-negative")
    fm = frame_map(ts, n + 1)
    w = ts.width
    clauses = []
    for j in range(n):
        clauses.extend(shift(ts.trans, j * w).clauses)
    return Cnf(clauses, fm.num_vars), fm


def frame_formula(f: Cnf, j: int, fm: FrameMap) -> Cnf:
    """Rename a formula over state bits 1..k into frame j."""
    _check_range(f, fm.k, "state formula")
    return shift(f, fm.offset(j))


def from_frame(f: Cnf, j: int, fm: FrameMap) -> Cnf:
    """Inverse of :func:`frame_formula`."""
    o = fm.offset(j)
    lo, hi = o + 1, o + fm.k
    out = []
    for c in f:
        for l in c:
            if not lo <= abs(l) <= hi:
                raise UsageError(f"literal {l} is not a state bit of frame {j}")
        out.append(Clause._trusted(tuple(l - o if l > 0 else l + o for l in c)))
    return Cnf(out, fm.k)


def negate_cnf(f: Cnf, first_aux: int):
    """Clauses equisatisfiable with the negation of f, using auxiliaries from ``first_aux``.

    Auxiliary y_t means clause t is falsified. Returns ``(clauses, next_free_var)``.
    The negation of the constant-true formula is the empty clause.
    """
    if not f.clauses:
        return [Clause(())], first_aux
    if f.has_empty_clause():
        return [], first_aux
    out = []
    ys = []
    y = first_aux
    for c in f:
        ys.append(y)
        out.extend(Clause([-y, -l]) for l in c)
        y += 1
    out.append(Clause(ys))
    return out, y


# -- traces -----------------------------------------------------------------------


@dataclass(frozen=True)
class Trace:
    """States s_0..s_n as bool tuples; ``inputs`` is None when unknown."""

    states: tuple
    inputs: tuple | None = None

    def __post_init__(self):
        if not self.states:
            raise UsageError("a trace needs at least one state")
        object.__setattr__(self, "states", tuple(tuple(bool(b) for b in s) for s in self.states))
        if self.inputs is not None:
            object.__setattr__(self, "inputs", tuple(tuple(bool(b) for b in x) for x in self.inputs))
            if len(self.inputs) != len(self.states) - 1:
                raise UsageError("a trace needs one input valuation per transition")

    @property
    def length(self) -> int:
        """Number of transitions."""
        return len(self.states) - 1


@dataclass(frozen=True)
class Holds:
    diameter: int
    holds = True


@dataclass(frozen=True)
class Counterexample:
    trace: Trace
    holds = False


def _state_assign(s, base: int = 0) -> dict:
    return {base + i + 1: b for i, b in enumerate(s)}


def _check_arity(ts, tr: Trace):
    for s in tr.states:
        if len(s) != ts.k:
            raise UsageError(f"state has {len(s)} bits, system has {ts.k}")
    if tr.inputs is not None:
        for x in tr.inputs:
            if len(x) != ts.m:
                raise UsageError(f"input has {len(x)} bits, system has {ts.m}")


def first_violation(ts: TransitionSystem, tr: Trace) -> str | None:
    """Description of the first failed trace condition, or None if the trace is valid."""
    _check_arity(ts, tr)
    k, m = ts.k, ts.m
    if not evaluate(ts.init, _state_assign(tr.states[0])):
        return "state 0 violates init"
    for i in range(tr.length):
        a = _state_assign(tr.states[i])
        a.update(_state_assign(tr.states[i + 1], k + m))
        if tr.inputs is not None:
            a.update(_state_assign(tr.inputs[i], k))
            ok = evaluate(ts.trans, a)
        else:
            s = Solver()
            s.add_cnf(cofactor(ts.trans, a))
            ok = s.solve().is_sat
        if not ok:
            return f"step {i} -> {i + 1} violates trans"
    return None


def validate_trace(ts: TransitionSystem, tr: Trace) -> bool:
    return first_violation(ts, tr) is None


def cex_violation(ts: TransitionSystem, tr: Trace) -> str | None:
    """Why ``tr`` is not a counterexample, or None if it is one."""
    why = first_violation(ts, tr)
    if why is not None:
        return why
    for i, s in enumerate(tr.states[:-1]):
        if not evaluate(ts.prop, _state_assign(s)):
            return f"state {i} already violates the property"
    if evaluate(ts.prop, _state_assign(tr.states[-1])):
        return f"final state {tr.length} satisfies the property"
    return None


def is_counterexample(ts: TransitionSystem, tr: Trace) -> bool:
    return cex_violation(ts, tr) is None


def remove_stutter_steps(tr: Trace) -> Trace:
    """Drop steps whose stutter input (last input bit) is 0 and strip that bit."""
    if tr.inputs is None:
        raise UsageError("trace has no inputs")
    states = [tr.states[0]]
    inputs = []
    for x, s in zip(tr.inputs, tr.states[1:]):
        if not x[-1]:
            continue
        states.append(s)
        inputs.append(x[:-1])
    return Trace(tuple(states), tuple(inputs))


def _bits(s) -> str:
    return "".join("1" if b else "0" for b in s)


def format_cex(tr: Trace) -> str:
    lines = [f"cex {tr.length}"]
    for i, s in enumerate(tr.states):
        lines.append(f"s {_bits(s)}")
        if i < tr.length:
            x = tr.inputs[i] if tr.inputs is not None else ()
            lines.append(f"i {_bits(x)}".rstrip())
    return "\n".join(lines) + "\n"


def parse_cex(text: str) -> Trace:
    rows = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c "):
            continue
        rows.append((lineno, line))
    if not rows or not rows[0][1].startswith("cex"):
        raise ParseError("missing 'cex <n>' header", rows[0][0] if rows else None)
    lineno, head = rows[0]
    parts = head.split()
    if len(parts) != 2:
        raise ParseError("expected 'cex <n>'", lineno, 1)
    try:
        n = int(parts[1])
    except ValueError:
        raise ParseError("non-integer transition count", lineno, 5) from None
    body = rows[1:]
    if len(body) != 2 * n + 1:
        raise ParseError(f"expected {2 * n + 1} trace lines, found {len(body)}")
    states, inputs = [], []
    for idx, (lineno, line) in enumerate(body):
        tag = "s" if idx % 2 == 0 else "i"
        parts = line.split()
        if parts[0] != tag:
            raise ParseError(f"expected an '{tag}' line", lineno, 1)
        bits = parts[1] if len(parts) > 1 else ""
        if len(parts) > 2 or any(ch not in "01" for ch in bits):
            raise ParseError("bad bit string", lineno, 3)
        (states if tag == "s" else inputs).append(tuple(ch == "1" for ch in bits))
    return Trace(tuple(states), tuple(inputs))


# -- .sts files ---------------------------------------------------------------------


_SECTIONS = ("init", "trans", "property")


def parse_sts(text: str) -> TransitionSystem:
    """Read the ``sts 1`` format."""
    k = m = None
    section = None
    seen = set()
    clauses = {s: [] for s in _SECTIONS}
    cur = []
    cur_line = None
    ended = False
    got_magic = False
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if ended:
            raise ParseError("content after 'end'", lineno, 1)
        parts = line.split()
        if not got_magic:
            if parts != ["sts", "1"]:
                raise ParseError("expected header 'sts 1'", lineno, 1)
            got_magic = True
            continue
        head = parts[0]
        if head in ("states", "inputs"):
            if section is not None:
                raise ParseError(f"'{head}' after clause sections", lineno, 1)
            if len(parts) != 2:
                raise ParseError(f"expected '{head} <n>'", lineno, 1)
            try:
                val = int(parts[1])
            except ValueError:
                raise ParseError(f"non-integer {head} count", lineno, len(head) + 2) from None
            if val < 0 or (head == "states" and val < 1):
                raise ParseError(f"invalid {head} count {val}", lineno, len(head) + 2)
            if head == "states":
                if k is not None:
                    raise ParseError("duplicate 'states'", lineno, 1)
                k = val
            else:
                if m is not None:
                    raise ParseError("duplicate 'inputs'", lineno, 1)
                m = val
            continue
        if head in _SECTIONS or head == "end":
            if len(parts) != 1:
                raise ParseError(f"'{head}' must stand alone on its line", lineno, len(head) + 2)
            if k is None or m is None:
                raise ParseError("'states' and 'inputs' must precede the sections", lineno, 1)
            if cur:
                raise ParseError("unterminated clause", cur_line, 1)
            if head == "end":
                ended = True
                continue
            if head in seen:
                raise ParseError(f"duplicate section '{head}'", lineno, 1)
            seen.add(head)
            section = head
            continue
        if section is None:
            raise ParseError(f"unexpected {head!r} outside a section", lineno, 1)
        top = 2 * k + m if section == "trans" else k
        col = 0
        for tok in parts:
            col = raw.index(tok, col) + 1
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno, col) from None
            if abs(lit) > top:
                raise ParseError(f"literal {lit} out of range in {section} section (max {top})", lineno, col)
            if lit == 0:
                c = make_clause(cur)
                if c is not None:
                    clauses[section].append(c)
                cur = []
            else:
                if not cur:
                    cur_line = lineno
                cur.append(lit)
            col += len(tok) - 1
    if not got_magic:
        raise ParseError("empty input, expected header 'sts 1'")
    if cur:
        raise ParseError("unterminated clause", cur_line, 1)
    if k is None or m is None:
        raise ParseError("missing 'states' or 'inputs' line")
    missing = [s for s in _SECTIONS if s not in seen]
    if missing:
        raise ParseError(f"missing section(s): {', '.join(missing)}")
    if not ended:
        raise ParseError("missing 'end'")
    return TransitionSystem(
        k,
        m,
        Cnf(clauses["init"], k),
        Cnf(clauses["trans"], 2 * k + m),
        Cnf(clauses["property"], k),
    )


def format_sts(ts: TransitionSystem, comments: Sequence[str] = ()) -> str:
    if ts.stuttered:
        raise UsageError("stuttered systems are internal and not written to files")
    lines = ["sts 1"]
    lines += [f"c {c}" for c in comments]
    lines += [f"states {ts.k}", f"inputs {ts.m}"]
    for name, f in (("init", ts.init), ("trans", ts.trans), ("property", ts.prop)):
        lines.append(name)
        for c in f:
            lines.append("".join(f"{l} " for l in c) + "0")
    lines.append("end")
    return "\n".join(lines) + "\n"


def load_sts(path) -> TransitionSystem:
    with open(path, encoding="utf-8") as fh:
        return parse_sts(fh.read())
