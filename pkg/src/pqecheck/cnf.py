"""Clauses and CNF formulas over integer variables.

Literals use the DIMACS convention: ``+v`` / ``-v`` for variable ``v >= 1``.
A :class:`Clause` is a canonical tuple of literals sorted by variable id and
can never be a tautology. A :class:`Cnf` with no clauses is the constant
true; one containing the empty clause is the constant false.

Assignments are plain ``dict[int, bool]`` mappings.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping

from .errors import ParseError, UsageError

Assignment = dict


class Clause(tuple):
    """Immutable disjunction of literals, sorted by variable id.

    Construction rejects zero literals, repeated variables and complementary
    pairs. Use :func:`make_clause` when duplicates should be merged.
    """

    __slots__ = ()

    def __new__(cls, lits: Iterable[int] = ()):
        lits = tuple(sorted(lits, key=abs))
        prev = 0
        for lit in lits:
            if not isinstance(lit, int) or lit == 0:
                raise UsageError(f"invalid literal {lit!r}")
            if abs(lit) == abs(prev):
                kind = "duplicate" if lit == prev else "complementary"
                raise UsageError(f"{kind} literal {lit} in clause")
            prev = lit
        return tuple.__new__(cls, lits)

    @classmethod
    def _trusted(cls, sorted_lits) -> "Clause":
        return tuple.__new__(cls, sorted_lits)

    @property
    def vars(self) -> frozenset:
        return frozenset(abs(l) for l in self)

    def has_var(self, v: int) -> bool:
        return v in self or -v in self

    def __repr__(self):
        return "Clause(" + " ".join(str(l) for l in self) + ")"


def make_clause(lits: Iterable[int]) -> Clause | None:
    """Build a clause merging duplicates; ``None`` if the literals form a tautology."""
    s = set(lits)
    if 0 in s:
        raise UsageError("literal 0 is not allowed")
    for l in s:
        if -l in s:
            return None
    return Clause._trusted(sorted(s, key=abs))


class Cnf:
    """Conjunction of clauses with an upper bound on variable ids."""

    __slots__ = ("clauses", "num_vars")

    def __init__(self, clauses: Iterable = (), num_vars: int | None = None):
        cl = []
        top = 0
        for c in clauses:
            if not isinstance(c, Clause):
                c = Clause(c)
            cl.append(c)
            if c:
                top = max(top, abs(c[-1]))
        if num_vars is None:
            num_vars = top
        elif top > num_vars:
            raise UsageError(f"variable {top} exceeds declared bound {num_vars}")
        self.clauses = tuple(cl)
        self.num_vars = num_vars

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)

    def __len__(self):
        return len(self.clauses)

    def __getitem__(self, i):
        return self.clauses[i]

    def __eq__(self, other):
        if not isinstance(other, Cnf):
            return NotImplemented
        return self.clauses == other.clauses

    def __hash__(self):
        return hash(self.clauses)

    def __and__(self, other: "Cnf") -> "Cnf":
        return Cnf(self.clauses + other.clauses, max(self.num_vars, other.num_vars))

    def __repr__(self):
        body = ", ".join("(" + " ".join(map(str, c)) + ")" for c in self.clauses)
        return f"Cnf[{body}]"

    @property
    def vars(self) -> frozenset:
        return frozenset(abs(l) for c in self.clauses for l in c)

    def is_true(self) -> bool:
        return not self.clauses

    def has_empty_clause(self) -> bool:
        return any(len(c) == 0 for c in self.clauses)


def resolve(c1: Clause, c2: Clause, v: int) -> Clause | None:
    """Resolvent of ``c1`` and ``c2`` on variable ``v``; ``None`` for a tautology."""
    if v in c1 and -v in c2:
        pass
    elif -v in c1 and v in c2:
        pass
    else:
        raise UsageError(f"clauses cannot be resolved on variable {v}")
    return make_clause([l for l in c1 if abs(l) != v] + [l for l in c2 if abs(l) != v])


def cofactor(f: Cnf, a: Mapping[int, bool]) -> Cnf:
    out = []
    for c in f:
        keep = []
        sat = False
        for l in c:
            val = a.get(abs(l))
            if val is None:
                keep.append(l)
            elif val == (l > 0):
                sat = True
                break
        if not sat:
            out.append(Clause._trusted(keep))
    return Cnf(out, f.num_vars)


def rename(f: Cnf, mapping: Mapping[int, int]) -> Cnf:
    """Rename variables; unmapped variables stay put.

    The mapping must be injective on the variables that occur in ``f``.
    """
    occurring = f.vars
    images = {}
    for v in occurring:
        w = mapping.get(v, v)
        if w < 1:
            raise UsageError(f"variable {v} mapped to invalid id {w}")
        if w in images:
            raise UsageError(f"variables {images[w]} and {v} both map to {w}")
        images[w] = v
    out = []
    for c in f:
        lits = [mapping.get(l, l) if l > 0 else -mapping.get(-l, -l) for l in c]
        out.append(Clause(lits))
    return Cnf(out, max(f.num_vars, max(images, default=0)))


def shift(f: Cnf, offset: int) -> Cnf:
    """Add ``offset`` to every variable id (the time-frame renaming)."""
    if offset == 0:
        return f
    out = [Clause._trusted(tuple(l + offset if l > 0 else l - offset for l in c)) for c in f]
    return Cnf(out, f.num_vars + offset)


def evaluate(f: Cnf, a: Mapping[int, bool]) -> bool:
    for c in f:
        for l in c:
            if abs(l) not in a:
                raise UsageError(f"assignment does not cover variable {abs(l)}")
    return all(any(a[abs(l)] == (l > 0) for l in c) for c in f)


def clause_value(c: Iterable[int], a: Mapping[int, bool]):
    """True/False if decided by the partial assignment ``a``, else None."""
    undecided = False
    for l in c:
        val = a.get(abs(l))
        if val is None:
            undecided = True
        elif val == (l > 0):
            return True
    return None if undecided else False


def longest_falsified_clause(s: Mapping[int, bool]) -> Clause:
    """The clause over the domain of ``s`` that ``s`` alone falsifies."""
    return Clause._trusted(tuple(-v if val else v for v, val in sorted(s.items())))


def cube_of(s: Mapping[int, bool]) -> list:
    """Unit literals satisfied by ``s``."""
    return [v if val else -v for v, val in sorted(s.items())]


def subsumes(c: Clause, d: Clause) -> bool:
    return len(c) <= len(d) and set(c) <= set(d)


def simplify(clauses: Iterable[Clause]) -> list:
    """Drop duplicate and subsumed clauses, keeping first-seen order."""
    uniq = list(dict.fromkeys(clauses))
    by_len = sorted(range(len(uniq)), key=lambda i: len(uniq[i]))
    kept = []
    kept_sets = []
    for i in by_len:
        s = set(uniq[i])
        if any(k <= s for k in kept_sets):
            continue
        kept.append(i)
        kept_sets.append(s)
    return [uniq[i] for i in sorted(kept)]


# DIMACS -----------------------------------------------------------------


def parse_dimacs(text: str) -> Cnf:
    num_vars = None
    clauses = []
    cur = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("bad header, expected 'p cnf <vars> <clauses>'", lineno, 1)
            try:
                num_vars = int(parts[2])
                int(parts[3])  # clause count is advisory
            except ValueError:
                raise ParseError("non-integer header field", lineno, 1) from None
            continue
        if num_vars is None:
            raise ParseError("clause before header", lineno, 1)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", lineno, raw.find(tok) + 1) from None
            if abs(lit) > num_vars:
                raise ParseError(f"literal {lit} out of range", lineno, raw.find(tok) + 1)
            if lit == 0:
                c = make_clause(cur)
                if c is not None:
                    clauses.append(c)
                cur = []
            else:
                cur.append(lit)
    if cur:
        raise ParseError("unterminated clause at end of input")
    if num_vars is None:
        raise ParseError("missing 'p cnf' header")
    return Cnf(clauses, num_vars)


def format_dimacs(f: Cnf, comments: Iterable[str] = ()) -> str:
    lines = [f"c {c}" for c in comments]
    lines.append(f"p cnf {f.num_vars} {len(f)}")
    for c in f:
        lines.append(" ".join(str(l) for l in c) + (" 0" if c else "0"))
    return "\n".join(lines) + "\n"
