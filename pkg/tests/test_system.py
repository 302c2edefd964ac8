import itertools
import random

import pytest

from helpers import CORPUS_DIR, assignments, sat_by
from pqecheck.cnf import Clause, Cnf
from pqecheck.errors import ParseError, UsageError
from pqecheck.gen import counter
from pqecheck.system import (
    Trace,
    TransitionSystem,
    add_stuttering,
    cex_violation,
    first_violation,
    format_cex,
    format_sts,
    frame_formula,
    from_frame,
    is_counterexample,
    load_sts,
    negate_cnf,
    parse_cex,
    parse_sts,
    remove_stutter_steps,
    strip_stuttering,
    unroll,
    validate_trace,
)


def brute_steps(ts):
    """All (s, s') pairs with some input satisfying T, by plain enumeration."""
    k, m = ts.k, ts.m
    out = set()
    for a in assignments(range(1, 2 * k + m + 1)):
        if sat_by(ts.trans, a):
            s = tuple(a[i] for i in range(1, k + 1))
            t = tuple(a[k + m + i] for i in range(1, k + 1))
            out.add((s, t))
    return out


def bits(text):
    return tuple(ch == "1" for ch in text)


class TestParse:
    def test_minimal(self):
        ts = parse_sts("sts 1\nstates 1\ninputs 0\ninit\ntrans\nproperty\nend\n")
        assert ts.k == 1 and ts.m == 0
        assert ts.init.is_true() and ts.trans.is_true() and ts.prop.is_true()

    def test_trans_range(self):
        text = "sts 1\nstates 1\ninputs 1\ninit\ntrans\n4 0\nproperty\nend\n"
        with pytest.raises(ParseError) as e:
            parse_sts(text)
        assert e.value.line == 6 and e.value.column == 1

    def test_corpus_counter2(self):
        ts = load_sts(CORPUS_DIR / "counter2.sts")
        assert (ts.k, ts.m) == (2, 1)
        assert ts == counter(2)

    @pytest.mark.parametrize(
        "text",
        [
            "",
            "sts 2\n",
            "sts 1\nstates 1\ninit\ntrans\nproperty\nend\n",
            "sts 1\nstates 1\ninputs 0\ninit\n1\ntrans\nproperty\nend\n",
            "sts 1\nstates 1\ninputs 0\ninit\ntrans\nend\n",
            "sts 1\nstates 1\ninputs 0\ninit\ntrans\nproperty\n",
            "sts 1\nstates 1\ninputs 0\ninit\ninit\ntrans\nproperty\nend\n",
            "sts 1\nstates 1\ninputs 0\ninit\n1 x 0\ntrans\nproperty\nend\n",
            "sts 1\nstates 0\ninputs 0\ninit\ntrans\nproperty\nend\n",
            "sts 1\nstates 1\ninputs 0\ninit\ntrans\nproperty\nend\n1 0\n",
        ],
    )
    def test_malformed(self, text):
        with pytest.raises(ParseError):
            parse_sts(text)

    def test_round_trip_corpus(self):
        for path in sorted(CORPUS_DIR.glob("*.sts")):
            ts = load_sts(path)
            assert parse_sts(format_sts(ts)) == ts


class TestStuttering:
    def test_toggler_construction(self):
        ts = TransitionSystem(1, 0, Cnf((), 1), Cnf([[1, 2], [-1, -2]], 2), Cnf((), 1))
        st = add_stuttering(ts)
        v = 2
        expected = {
            Clause([-v, 1, 3]),
            Clause([-v, -1, -3]),
            Clause([v, -1, 3]),
            Clause([v, 1, -3]),
        }
        assert set(st.trans) == expected
        assert st.stutter_var == v

    def test_frozen_step_allowed(self):
        r = random.Random(1)
        ts = add_stuttering(counter(3))
        k, m = ts.k, ts.m
        for _ in range(50):
            s = [r.random() < 0.5 for _ in range(k)]
            a = {i + 1: s[i] for i in range(k)}
            a.update({k + i + 1: r.random() < 0.5 for i in range(m - 1)})
            a[ts.stutter_var] = False
            a.update({k + m + i + 1: s[i] for i in range(k)})
            assert sat_by(ts.trans, a)

    def test_steps_are_original_plus_self_loops(self):
        ts = counter(2)
        st = add_stuttering(ts)
        loops = {(s, s) for s in itertools.product((False, True), repeat=2)}
        assert brute_steps(st) == brute_steps(ts) | loops

    def test_strip_inverse(self):
        ts = counter(3)
        assert strip_stuttering(add_stuttering(ts), ts.m) == ts

    def test_double_stutter_rejected(self):
        with pytest.raises(UsageError):
            add_stuttering(add_stuttering(counter(2)))


class TestUnroll:
    def test_single_copy(self):
        ts = counter(2)
        f, fm = unroll(ts, 1)
        assert fm.frames == 2 and f == ts.trans

    def test_var_count(self):
        ts = counter(3)
        for n in range(4):
            _, fm = unroll(ts, n)
            assert fm.num_vars == (n + 1) * ts.k + n * ts.m

    def test_two_step_traces(self):
        ts = counter(2)
        f, fm = unroll(ts, 2)
        got = set()
        for a in assignments(range(1, fm.num_vars + 1)):
            if sat_by(f, a):
                got.add(tuple(tuple(a[v] for v in fm.state_vars(j)) for j in range(3)))
        steps = brute_steps(ts)
        want = {(s, t, u) for (s, t) in steps for (t2, u) in steps if t == t2}
        assert got == want

    def test_frame_renaming(self):
        ts = counter(2)
        _, fm = unroll(ts, 2)
        assert frame_formula(ts.init, 0, fm) == ts.init
        i1 = frame_formula(ts.init, 1, fm)
        assert i1.clauses == ((-4,), (-5,))
        assert from_frame(i1, 1, fm) == ts.init
        with pytest.raises(UsageError):
            from_frame(i1, 2, fm)
        with pytest.raises(UsageError):
            fm.offset(3)


class TestNegate:
    def check(self, f, k):
        neg, top = negate_cnf(f, k + 1)
        g = Cnf(neg)
        for a in assignments(range(1, k + 1)):
            some = any(
                sat_by(g, {**a, **ext}) for ext in assignments(range(k + 1, top))
            )
            assert some == (not sat_by(f, a))

    def test_random(self):
        r = random.Random(4)
        for _ in range(40):
            k = r.randint(1, 4)
            cls = [
                Clause(v if r.random() < 0.5 else -v for v in r.sample(range(1, k + 1), r.randint(1, k)))
                for _ in range(r.randint(1, 3))
            ]
            self.check(Cnf(cls, k), k)

    def test_constants(self):
        assert negate_cnf(Cnf(), 5) == ([Clause(())], 5)
        assert negate_cnf(Cnf([[]]), 5) == ([], 5)


class TestTraces:
    ts = counter(2)

    def test_one_step(self):
        assert validate_trace(self.ts, Trace((bits("00"), bits("01")), ((True,),)))

    def test_bad_start(self):
        assert first_violation(self.ts, Trace((bits("01"), bits("10")))) == "state 0 violates init"

    def test_singleton(self):
        assert validate_trace(self.ts, Trace((bits("00"),)))

    def test_inputs_found_by_sat(self):
        assert validate_trace(self.ts, Trace((bits("00"), bits("01"), bits("01"))))
        assert not validate_trace(self.ts, Trace((bits("00"), bits("10"))))

    def test_counterexample(self):
        tr = Trace(tuple(bits(s) for s in ("00", "01", "10", "11")), ((True,),) * 3)
        assert is_counterexample(self.ts, tr)
        assert not is_counterexample(self.ts.with_prop(Cnf((), 2)), tr)
        short = Trace(tr.states[:3], tr.inputs[:2])
        assert cex_violation(self.ts, short) == "final state 2 satisfies the property"

    def test_arity_checked(self):
        with pytest.raises(UsageError):
            validate_trace(self.ts, Trace((bits("000"),)))

    def test_remove_stutter_steps(self):
        tr = Trace(
            (bits("00"), bits("00"), bits("01")),
            ((True, False), (True, True)),
        )
        assert remove_stutter_steps(tr) == Trace((bits("00"), bits("01")), ((True,),))

    def test_cex_format_round_trip(self):
        tr = Trace((bits("00"), bits("01")), ((True,),))
        text = format_cex(tr)
        assert text == "cex 1\ns 00\ni 1\ns 01\n"
        assert parse_cex(text) == tr

    def test_empty_inputs_line(self):
        tr = Trace((bits("1"), bits("0")), ((),))
        assert format_cex(tr) == "cex 1\ns 1\ni\ns 0\n"
        assert parse_cex(format_cex(tr)) == tr

    @pytest.mark.parametrize("text", ["", "cex x\n", "cex 1\ns 00\n", "cex 0\ni 1\n", "cex 0\ns 0a\n"])
    def test_bad_cex(self, text):
        with pytest.raises(ParseError):
            parse_cex(text)
