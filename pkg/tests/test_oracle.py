import random

import pytest

from helpers import assignments, random_cnf, sat_by
from pqecheck.cnf import Cnf
from pqecheck.errors import UsageError
from pqecheck.gen import counter, random_fsm
from pqecheck.oracle import (
    check_property_bf,
    exact_diameter,
    exists_table,
    pqe_check,
    qe_enum,
    reach_bfs,
    state_bits,
    state_index,
    state_str,
    truth_table,
)
from pqecheck.system import TransitionSystem, is_counterexample


def py_levels(ts):
    """Breadth-first level sets by direct clause evaluation."""
    k, m = ts.k, ts.m
    states = [tuple(a[i] for i in range(1, k + 1)) for a in assignments(range(1, k + 1))]
    succ = {s: set() for s in states}
    for a in assignments(range(1, 2 * k + m + 1)):
        if sat_by(ts.trans, a):
            succ[tuple(a[i] for i in range(1, k + 1))].add(tuple(a[k + m + i] for i in range(1, k + 1)))
    frontier = {s for s in states if sat_by(ts.init, dict(zip(range(1, k + 1), s)))}
    seen = set(frontier)
    levels = [frontier]
    while True:
        nxt = {t for s in frontier for t in succ[s]} - seen
        if not nxt:
            return levels
        seen |= nxt
        levels.append(nxt)
        frontier = nxt


def as_sets(report):
    return [{state_bits(s, report.k) for s in lv} for lv in report.levels]


def test_state_encoding():
    assert state_bits(1, 3) == (True, False, False)
    assert state_index((True, False, True)) == 5
    assert state_str((False, True)) == "01"


def test_counter2_levels():
    rep = reach_bfs(counter(2))
    assert [sorted(state_str(s) for s in lv) for lv in as_sets(rep)] == [["00"], ["01"], ["10"], ["11"]]
    assert rep.diameter == 3
    assert rep.format() == "level 0: 1\nlevel 1: 1\nlevel 2: 1\nlevel 3: 1\n"
    assert "  11" in rep.format(dump=True)


def test_all_initial_gives_zero():
    ts = counter(3).with_init(Cnf((), 3))
    assert exact_diameter(ts) == 0


def test_no_transitions_beyond_stutter():
    ts = TransitionSystem(2, 0, Cnf([[-1]], 2), Cnf([[1, -3], [-1, 3], [2, -4], [-2, 4]], 4), Cnf((), 2))
    rep = reach_bfs(ts)
    assert len(rep.levels) == 1 and len(rep.levels[0]) == 2


def test_diameters():
    assert exact_diameter(counter(2)) == 3
    assert exact_diameter(counter(3)) == 7


def test_against_python_bfs():
    for seed in range(12):
        ts = random_fsm(4, 1 + seed % 2, 0.4, seed)
        assert as_sets(reach_bfs(ts)) == py_levels(ts)
    assert as_sets(reach_bfs(counter(3))) == py_levels(counter(3))


def test_verdicts():
    v = check_property_bf(counter(2))
    assert not v.holds and v.trace.length == 3
    assert is_counterexample(counter(2), v.trace)
    assert check_property_bf(counter(2, safe=True)).holds


def test_unreachable_bad():
    from pqecheck.gen import unreachable_bad

    v = check_property_bf(unreachable_bad())
    assert v.holds and v.diameter == 2


def test_tables_agree_with_evaluation():
    r = random.Random(3)
    for _ in range(30):
        n = r.randint(1, 7)
        f = random_cnf(r, n, r.randint(0, 6))
        order = list(range(1, n + 1))
        t = truth_table(f, order)
        for idx, a in enumerate(_indexed(order)):
            assert bool(t[idx]) == sat_by(f, a)


def _indexed(order):
    for idx in range(1 << len(order)):
        yield {v: bool((idx >> i) & 1) for i, v in enumerate(order)}


def test_exists_table():
    f = Cnf([[1, 3], [1, -3], [2, 3]])
    t = exists_table(f, [1, 2])
    # index bit0 = var1, bit1 = var2
    assert list(t) == [False, True, False, True]


class TestPqeCheck:
    a = Cnf([[1, 2]])
    b = Cnf([[1, -2]])

    def test_correct(self):
        assert pqe_check(self.a, self.b, {2}, Cnf([[1]]))

    def test_missing_clause(self):
        assert not pqe_check(self.a, self.b, {2}, Cnf())

    def test_empty_a(self):
        assert pqe_check(Cnf(), self.b, {2}, Cnf())

    def test_rejects_quantified_in_result(self):
        with pytest.raises(UsageError):
            pqe_check(self.a, self.b, {2}, Cnf([[2]]))


class TestQe:
    def test_resolution(self):
        assert qe_enum(Cnf([[1, 2], [1, -2]]), {2}).clauses == ((1,),)

    def test_true(self):
        assert qe_enum(Cnf([[2]]), {2}).is_true()

    def test_identity(self):
        f = Cnf([[1, 2], [-1, 3]])
        g = qe_enum(f, set())
        for a in assignments([1, 2, 3]):
            assert sat_by(f, a) == sat_by(g, a)


def test_bound():
    with pytest.raises(UsageError):
        truth_table(Cnf(), list(range(1, 30)))
