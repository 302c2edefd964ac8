import pytest

from helpers import CORPUS_DIR
from pqecheck.errors import UsageError
from pqecheck.gen import FAMILIES, corpus_models, counter, generate, random_fsm, ring, shift_register
from pqecheck.oracle import check_property_bf, exact_diameter
from pqecheck.system import format_sts, load_sts, parse_sts


def test_counter_diameters():
    for k in range(1, 5):
        assert exact_diameter(counter(k)) == (1 << k) - 1
        assert exact_diameter(counter(k, "saturate")) == (1 << k) - 1


def test_counter_shortest_cex():
    for k in range(1, 5):
        v = check_property_bf(counter(k))
        assert not v.holds and v.trace.length == (1 << k) - 1


def test_shift_register():
    v = check_property_bf(shift_register(3))
    assert not v.holds and v.trace.length == 3
    assert exact_diameter(shift_register(4)) == 4


def test_ring_holds():
    v = check_property_bf(ring(4))
    assert v.holds and v.diameter == 3


def test_random_fsm_deterministic():
    assert random_fsm(5, 2, 0.3, 4) == random_fsm(5, 2, 0.3, 4)
    assert random_fsm(5, 2, 0.3, 4) != random_fsm(5, 2, 0.3, 5)


def test_corpus_files_match_generators():
    models = corpus_models()
    assert len(models) >= 20
    for name, ts in models.items():
        assert load_sts(CORPUS_DIR / f"{name}.sts") == ts


def test_corpus_mix():
    verdicts = [check_property_bf(ts).holds for ts in corpus_models().values()]
    assert any(verdicts) and not all(verdicts)
    assert all(ts.k + ts.m <= 12 for ts in corpus_models().values())


@pytest.mark.parametrize(
    "family,params",
    [("counter", ["3"]), ("counter", ["2", "saturate", "safe"]), ("shift", ["3"]), ("ring", ["3"]), ("gadget", []), ("fsm", ["4", "1", "0.5"])],
)
def test_generate_round_trip(family, params):
    ts = generate(family, *params)
    assert parse_sts(format_sts(ts)) == ts


@pytest.mark.parametrize(
    "family,params",
    [("counter", []), ("counter", ["x"]), ("counter", ["2", "down"]), ("ring", ["1"]), ("fsm", ["3", "1", "2.0"]), ("nope", [])],
)
def test_generate_errors(family, params):
    with pytest.raises(UsageError):
        generate(family, *params)


def test_families_listed():
    assert set(FAMILIES) == {"counter", "shift", "ring", "gadget", "fsm"}
