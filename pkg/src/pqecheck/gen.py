"""Deterministic generators for small benchmark systems.

State bit strings print variable 1 first, so for counters variable 1 is the
most significant bit and ``00 -> 01 -> 10 -> 11`` reads naturally.
"""

from __future__ import annotations

import itertools
import random

from .cnf import Clause, Cnf
from .errors import UsageError
from .system import TransitionSystem


def _all_zero(k):
    return Cnf([Clause([-i]) for i in range(1, k + 1)], k)


def _not_all_ones(k):
    return Cnf([Clause([-i for i in range(1, k + 1)])], k)


def counter(k: int, mode: str = "wrap", safe: bool = False) -> TransitionSystem:
    """k-bit counter from 0 that increments when its input is 1.

    ``wrap`` returns to 0 after the maximum, ``saturate`` stays there. The
    property forbids the all-ones state unless ``safe`` makes it constant true.
    """
    if k < 1:
        raise UsageError("counter needs k >= 1")
    if mode not in ("wrap", "saturate"):
        raise UsageError(f"unknown counter mode {mode!r}")
    m = 1
    inc = k + 1

    def cur(b):  # bit b (0 = least significant) as a present-state variable
        return k - b

    def nxt(b):
        return k + m + (k - b)

    clauses = []
    for b in range(k):
        s, n = cur(b), nxt(b)
        lower = [cur(j) for j in range(b)]
        upper = [cur(j) for j in range(b + 1, k)]
        # s=0: next = inc and all lower bits set
        clauses.append([s, -n, inc])
        clauses += [[s, -n, x] for x in lower]
        clauses.append([s, n, -inc] + [-x for x in lower])
        # s=1: next = 0 iff the bit flips
        if mode == "wrap":
            clauses.append([-s, n, inc])
            clauses += [[-s, n, x] for x in lower]
            clauses.append([-s, -n, -inc] + [-x for x in lower])
        elif upper:
            clauses.append([-s, n, inc])
            clauses += [[-s, n, x] for x in lower]
            clauses.append([-s, n] + [-x for x in upper])
            clauses += [[-s, -n, -inc, y] + [-x for x in lower] for y in upper]
        else:
            clauses.append([-s, n])
    prop = Cnf((), k) if safe else _not_all_ones(k)
    return TransitionSystem(k, m, _all_zero(k), Cnf(clauses, 2 * k + m), prop)


def shift_register(k: int) -> TransitionSystem:
    """Input enters stage 1 and moves one stage per step; all-ones is bad."""
    if k < 1:
        raise UsageError("shift register needs k >= 1")
    m = 1
    x = k + 1
    clauses = [[x, -(k + 2)], [-x, k + 2]]
    for i in range(2, k + 1):
        n = k + m + i
        clauses += [[i - 1, -n], [-(i - 1), n]]
    return TransitionSystem(k, m, _all_zero(k), Cnf(clauses, 2 * k + m), _not_all_ones(k))


def ring(k: int) -> TransitionSystem:
    """One token rotating through k stages; the property says at most one token."""
    if k < 2:
        raise UsageError("ring needs k >= 2")
    clauses = []
    for i in range(1, k + 1):
        src = k if i == 1 else i - 1
        n = k + i
        clauses += [[src, -n], [-src, n]]
    init = Cnf([Clause([1])] + [Clause([-i]) for i in range(2, k + 1)], k)
    prop = Cnf([Clause([-i, -j]) for i, j in itertools.combinations(range(1, k + 1), 2)], k)
    return TransitionSystem(k, 0, init, Cnf(clauses, 2 * k), prop)


def unreachable_bad() -> TransitionSystem:
    """Three bits (a, b, c): a toggles, b copies a, c keeps its value.

    From 000 the bit c never rises, so the bad states (a and c both set)
    are unreachable even though they satisfy every single-bit constraint
    except the property.
    """
    k = 3
    a, c = 1, 3
    na, nb, nc = 4, 5, 6
    clauses = [[a, na], [-a, -na], [a, -nb], [-a, nb], [c, -nc], [-c, nc]]
    prop = Cnf([Clause([-a, -c])], k)
    return TransitionSystem(k, 0, _all_zero(k), Cnf(clauses, 2 * k), prop)


def random_fsm(k: int, m: int, density: float = 0.3, seed: int = 0) -> TransitionSystem:
    """Random deterministic machine: each next bit is a random function of a few
    present bits and inputs; a random initial cube; one or two random property clauses."""
    if k < 1 or m < 0:
        raise UsageError("random FSM needs k >= 1 and m >= 0")
    if not 0 < density <= 1:
        raise UsageError("density must lie in (0, 1]")
    rng = random.Random(f"fsm-{k}-{m}-{density}-{seed}")
    pool = list(range(1, k + m + 1))
    clauses = []
    for i in range(1, k + 1):
        support = [v for v in pool if rng.random() < density][:4]
        if not support:
            support = [rng.choice(pool)]
        n = k + m + i
        for vals in itertools.product((False, True), repeat=len(support)):
            out = rng.random() < 0.5
            cube = [-v if val else v for v, val in zip(support, vals)]
            clauses.append(cube + [n if out else -n])
    fixed = [i for i in range(1, k + 1) if rng.random() < 0.8] or [1]
    init = Cnf([Clause([i if rng.random() < 0.25 else -i]) for i in fixed], k)
    prop = []
    for _ in range(rng.choice((1, 2))):
        width = min(k, rng.choice((2, 3)))
        vs = rng.sample(range(1, k + 1), width)
        prop.append(Clause(v if rng.random() < 0.5 else -v for v in vs))
    return TransitionSystem(k, m, init, Cnf(clauses, 2 * k + m), Cnf(prop, k))


# sizes of the bundled random machines (k, m), all with k + m <= 12
RANDOM_SIZES = ((3, 1), (4, 1), (4, 2), (5, 1), (5, 2), (6, 1), (6, 2), (7, 2), (8, 2), (8, 4))


def corpus_models() -> dict:
    """Name -> system for the bundled corpus."""
    models = {
        "counter2": counter(2),
        "counter2_safe": counter(2, safe=True),
        "counter3": counter(3),
        "counter3_safe": counter(3, safe=True),
        "counter4": counter(4),
        "counter4_sat": counter(4, "saturate"),
        "counter5": counter(5),
        "shift3": shift_register(3),
        "shift4": shift_register(4),
        "ring4": ring(4),
        "gadget": unreachable_bad(),
    }
    for i, (k, m) in enumerate(RANDOM_SIZES):
        models[f"fsm{i}"] = random_fsm(k, m, 0.3, seed=i)
    return models


FAMILIES = ("counter", "shift", "ring", "gadget", "fsm")


def generate(family: str, *params, seed: int = 0) -> TransitionSystem:
    """Dispatch used by the command line: ``counter K [wrap|saturate] [safe]``,
    ``shift K``, ``ring K``, ``gadget``, ``fsm K M [DENSITY]``."""
    p = list(params)
    try:
        if family == "counter":
            k = int(p[0])
            mode = "wrap"
            safe = False
            for extra in p[1:]:
                if extra in ("wrap", "saturate"):
                    mode = extra
                elif extra == "safe":
                    safe = True
                else:
                    raise UsageError(f"unknown counter option {extra!r}")
            return counter(k, mode, safe)
        if family == "shift":
            return shift_register(int(p[0]))
        if family == "ring":
            return ring(int(p[0]))
        if family == "gadget":
            return unreachable_bad()
        if family == "fsm":
            density = float(p[2]) if len(p) > 2 else 0.3
            return random_fsm(int(p[0]), int(p[1]), density, seed)
    except (IndexError, ValueError) as e:
        if isinstance(e, UsageError):
            raise
        raise UsageError(f"bad parameters for {family}: {' '.join(map(str, params))}") from None
    raise UsageError(f"unknown family {family!r}; choose from {', '.join(FAMILIES)}")
