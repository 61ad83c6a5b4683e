import pytest

from traceblame import parse
from traceblame.events import EMPTY
from traceblame.lattice import AnalysisWarning, UnknownName, build_lattice
from traceblame.observation import (
    OMNISCIENT,
    CognizanceSpec,
    InvalidTrace,
    ObservationEngine,
    cognizance,
    compute_taint,
    hidden_control_flow,
)
from traceblame.semantics import enumerate_semantics

from conftest import prefix_by_texts

SECOND_ADMIN = CognizanceSpec("second_admin", frozenset({"input_1"}))


@pytest.fixture(scope="module")
def engines(access_control):
    _, semantics, lattice, _ = access_control
    omni = ObservationEngine(semantics, lattice)
    hidden = ObservationEngine(
        semantics, lattice, SECOND_ADMIN, warn_on_hidden_control=False
    )
    return semantics, lattice, omni, hidden


# --- inquiry: the five distinct values worked out for access control ---------


def test_inquiry_values(engines):
    semantics, lattice, omni, _ = engines
    def I(*texts):
        return omni.inquiry(prefix_by_texts(semantics, texts)).name

    assert I("apv=1") == "⊤"
    assert I("apv=1", "i1=0") == "RF"
    assert I("apv=1", "i1=1") == "⊤"
    assert I("apv=1", "i1=1", "¬(i1==0)") == "⊤"
    assert I("apv=1", "i1=1", "¬(i1==0)", "i2=0") == "RF"
    assert I("apv=1", "i1=1", "¬(i1==0)", "i2=1") == "RS"
    assert I("apv=1", "i1=1", "¬(i1==0)", "i2=1", "¬(apv!=0&&i2==0)", "typ=2") == "RW"


def test_inquiry_of_invalid_trace_is_bottom(engines):
    semantics, lattice, omni, _ = engines
    from traceblame.semantics import assign_event

    bogus = EMPTY.append(assign_event("L9", "acs", 7))
    assert omni.inquiry(bogus) == lattice.bottom


# --- cognizance ----------------------------------------------------------------


def test_omniscient_cognizance_is_singleton(engines):
    semantics, _, omni, _ = engines
    for sigma in semantics.valid_prefixes:
        assert omni.cognizance(sigma) == frozenset({sigma})


def test_second_admin_cognizance_matches_worked_example(engines):
    semantics, _, _, hidden = engines
    five = prefix_by_texts(semantics, ["apv=1", "i1=0", "i1==0", "apv=0", "i2=0"])
    partner = prefix_by_texts(semantics, ["apv=1", "i1=1", "¬(i1==0)", "i2=0"])
    assert hidden.cognizance(five) == frozenset({five, partner})


def test_cognizance_extensive(engines):
    semantics, _, _, hidden = engines
    for sigma in semantics.valid_prefixes:
        assert sigma in hidden.cognizance(sigma)


def test_cognizance_unread_hidden_source_is_singleton():
    program = parse("input unused in {0,1};\nx = input s in {0,1};\ny = x;")
    semantics = enumerate_semantics(program)
    spec = CognizanceSpec("blind", frozenset({"unused"}))
    for sigma in semantics.valid_prefixes:
        assert cognizance(spec, semantics, sigma) == frozenset({sigma})


def test_cognizance_requires_valid_trace(engines):
    semantics, _, _, hidden = engines
    from traceblame.semantics import assign_event

    with pytest.raises(InvalidTrace):
        hidden.cognizance(EMPTY.append(assign_event("L1", "apv", 9)))


def test_unknown_hidden_source_rejected(engines):
    semantics, lattice, _, _ = engines
    with pytest.raises(UnknownName):
        ObservationEngine(
            semantics, lattice, CognizanceSpec("x", frozenset({"nope"}))
        )


# --- observation ------------------------------------------------------------------


def test_omniscient_observation_equals_inquiry_everywhere(engines):
    semantics, _, omni, _ = engines
    # the oracle count of valid prefixes comes from the frozen trace texts
    texts = [t.texts() for t in semantics.traces]
    oracle_prefixes = {tuple(tt[:i]) for tt in texts for i in range(len(tt) + 1)}
    assert len(oracle_prefixes) == 40
    assert len(semantics.valid_prefixes) == 40
    for sigma in semantics.valid_prefixes:
        assert omni.observation(sigma) == omni.inquiry(sigma)


def test_second_admin_observation_values(engines):
    semantics, _, _, hidden = engines
    def O(*texts):
        return hidden.observation(prefix_by_texts(semantics, texts)).name

    # even knowing the first input was 0, only ⊤ is guaranteed
    assert O("apv=1", "i1=0") == "⊤"
    # a 1 from the second admin leaves the outcome open
    assert O("apv=1", "i1=0", "i1==0", "apv=0", "i2=1") == "⊤"
    # a 0 from the second admin settles the failure
    assert O("apv=1", "i1=0", "i1==0", "apv=0", "i2=0") == "RF"


def test_observation_decreasing_for_both_observers(engines):
    semantics, _, omni, hidden = engines
    for engine in (omni, hidden):
        for sigma in semantics.valid_prefixes:
            value = engine.observation(sigma).members
            for event in semantics.successor_events(sigma):
                assert engine.observation(sigma.append(event)).members <= value


def test_every_completion_lies_in_the_observation(engines):
    semantics, _, omni, hidden = engines
    for engine in (omni, hidden):
        for sigma in semantics.valid_prefixes:
            assert semantics.completions(sigma) <= engine.observation(sigma).members


# --- taint construction -------------------------------------------------------------


def test_taint_reaches_through_data_and_control(access_control):
    program, _, _, _ = access_control
    tainted_vars, tainted_points = compute_taint(program, frozenset({"input_1"}))
    assert {"i1", "apv", "acs"} <= tainted_vars
    assert "i2" not in tainted_vars and "typ" not in tainted_vars
    assert "L4" in tainted_points  # apv = 0 under the hidden test


def test_hidden_control_flow_detection(access_control):
    program, _, _, _ = access_control
    assert hidden_control_flow(program, frozenset({"input_1"}))
    straight = parse("h = input s in {0,1};\nl = input t in {0,1};\no = l;")
    assert not hidden_control_flow(straight, frozenset({"s"}))


def test_hidden_control_warning_emitted(access_control):
    _, semantics, lattice, _ = access_control
    with pytest.warns(AnalysisWarning):
        ObservationEngine(semantics, lattice, SECOND_ADMIN)
