import pytest

from helpers import assignments, sat_by
from pqecheck.cnf import Clause, Cnf, longest_falsified_clause
from pqecheck.errors import ResourceLimit, UsageError
from pqecheck.fc import (
    ExpandedInit,
    FcConfig,
    exclude_state,
    fc_prove,
    initial_expansion,
    invariant_status,
)
from pqecheck.gen import counter, random_fsm
from pqecheck.oracle import check_property_bf
from pqecheck.system import TransitionSystem, is_counterexample


def closed_four_bit():
    """Bits (a, b, c, d): (a, b) count modulo 3 from 00, c and d hold their value.

    The property forbids a=b=1, which the counter never reaches; c and d make
    the expanded initial set much larger than I.
    """
    k = 4
    clauses = [
        # a' = b and not a ; b' = not a and not b
        [-5, 2], [-5, -1], [5, -2, 1],
        [-6, -1], [-6, -2], [6, 1, 2],
        [-3, 7], [3, -7], [-4, 8], [4, -8],
    ]
    init = Cnf([[-1], [-2], [-3], [-4]], k)
    return TransitionSystem(k, 0, init, Cnf(clauses, 2 * k), Cnf([[-1, -2]], k))


def models(f, k):
    return {tuple(a[i] for i in range(1, k + 1)) for a in assignments(range(1, k + 1)) if sat_by(f, a)}


class TestExpansion:
    def test_true_property(self):
        ie = initial_expansion(counter(2, safe=True))
        assert ie.formula.is_true()

    def test_i_equals_p(self):
        ts = counter(2).with_prop(counter(2).init)
        assert initial_expansion(ts).formula == ts.init

    def test_counter2_excludes_only_11(self):
        ie = initial_expansion(counter(2))
        assert models(ie.formula, 2) == models(Cnf([[-1, -2]], 2), 2)

    def test_bad_initial_rejected(self):
        ts = counter(2).with_init(Cnf([[1], [2]], 2))
        with pytest.raises(UsageError):
            initial_expansion(ts)


class TestExclude:
    ts = counter(2)

    def test_greedy_drop(self):
        ie = initial_expansion(self.ts)
        new, c = exclude_state(ie, (True, False), self.ts)
        assert c == (-1,)
        assert new.exclusion_count == 1
        assert invariant_status(new, self.ts) == (True, True)

    def test_no_drop(self):
        ie = ExpandedInit(Cnf((), 2))
        s0 = (True, True)
        _, c = exclude_state(ie, s0, self.ts, drop_literals=False)
        assert c == longest_falsified_clause({1: True, 2: True})

    def test_postcondition(self):
        ie = ExpandedInit(Cnf((), 2))
        for s0 in [(False, True), (True, False), (True, True)]:
            new, _ = exclude_state(ie, s0, self.ts)
            assert not sat_by(new.formula, dict(enumerate(s0, 1)))
            assert invariant_status(new, self.ts)[0]

    def test_initial_state_rejected(self):
        with pytest.raises(UsageError):
            exclude_state(ExpandedInit(Cnf((), 2)), (False, False), self.ts)

    def test_already_excluded(self):
        ie = ExpandedInit(Cnf([Clause([-1])], 2))
        with pytest.raises(UsageError):
            exclude_state(ie, (True, False), self.ts)

    def test_second_state(self):
        ts = counter(3)
        ie = ExpandedInit(Cnf((), 3))
        _, c = exclude_state(ie, (True, True, False), ts, drop_literals=False, also=(True, False, False))
        assert c == (-1, 3)


class TestRuns:
    def test_counter2_cex(self):
        run = fc_prove(counter(2))
        assert not run.verdict.holds
        assert is_counterexample(counter(2), run.verdict.trace)
        assert run.verdict.trace.length == 3

    def test_true_property(self):
        run = fc_prove(counter(3, safe=True))
        assert run.verdict.holds and run.iterations == []

    def test_closed_model(self):
        ts = closed_four_bit()
        assert check_property_bf(ts).holds
        run = fc_prove(ts)
        assert run.verdict.holds
        for it in run.iterations:
            assert it.i_implies_exp and it.exp_implies_p

    @pytest.mark.parametrize("multi", [False, True])
    def test_random_against_oracle(self, multi):
        for seed in range(8):
            ts = random_fsm(4, 1, 0.4, seed)
            run = fc_prove(ts, FcConfig(multi_state=multi))
            ref = check_property_bf(ts)
            assert run.verdict.holds == ref.holds
            if not ref.holds:
                assert is_counterexample(ts, run.verdict.trace)
                assert run.verdict.trace.length == ref.trace.length
            for it in run.iterations:
                assert it.i_implies_exp and it.exp_implies_p

    def test_iteration_limit(self):
        with pytest.raises(ResourceLimit):
            fc_prove(counter(3), FcConfig(max_iterations=0))

    def test_log(self):
        from pqecheck.pp import PpConfig

        lines = []
        fc_prove(counter(2), FcConfig(pp=PpConfig(log=lines.append)))
        assert any(line.startswith("event=fc_exclude") for line in lines)
        assert lines[-1].startswith("event=fc_cex")
