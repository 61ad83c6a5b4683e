import itertools

import pytest

from traceblame import parse
from traceblame.lattice import (
    AnalysisWarning,
    EmptySemantics,
    MaximalProperty,
    NotALattice,
    UnknownName,
    build_lattice,
    prediction_abstraction,
    prediction_concretization,
    property_leaky,
)
from traceblame.semantics import enumerate_semantics, final_env

from conftest import prefix_by_texts


def test_access_control_lattice_structure(access_control):
    _, semantics, lattice, _ = access_control
    RF, RS = lattice.by_name("RF"), lattice.by_name("RS")
    RO, RW = lattice.by_name("RO"), lattice.by_name("RW")
    assert RF.members == frozenset(semantics.traces[:6])
    assert RS.members == semantics.trace_set - RF.members
    assert lattice.join(RF, RS) == lattice.top
    assert lattice.meet(RF, RS) == lattice.bottom
    assert lattice.leq(RO, RS) and lattice.leq(RW, RS)
    assert lattice.join(RO, RW) == RS
    assert lattice.meet_all([RF, RO, RW]) == lattice.bottom


def test_negative_balance_four_element_lattice(negative_balance):
    _, semantics, lattice, _ = negative_balance
    names = {e.name for e in lattice}
    assert names == {"⊥", "NB", "notNB", "⊤"}
    NB = lattice.by_name("NB")
    assert all(final_env(t)["balance"] < 0 for t in NB.members)
    assert len(NB.members) == 9


def test_trivial_lattice_warns():
    semantics = enumerate_semantics(parse("x = input s in {0,1};"))
    with pytest.warns(AnalysisWarning):
        lattice = build_lattice(semantics, [("ALL", lambda t: True)])
    assert len(lattice) == 2  # just ⊤ and ⊥, the named one is an alias
    assert lattice.by_name("ALL") == lattice.top


def test_closure_adds_synthetic_joins(access_control):
    _, _, lattice, _ = access_control
    synth = [e.name for e in lattice if e.name.startswith(("join(", "meet("))]
    assert "join(RF,RO)" in synth or "join(RO,RF)" in synth
    # closed under pairwise join and meet
    for a, b in itertools.combinations(lattice.elements, 2):
        lattice.join(a, b)
        lattice.meet(a, b)


def test_powerset_lattice():
    semantics = enumerate_semantics(parse("x = input s in {0,1,2};"))
    lattice = build_lattice(semantics, [], powerset=True)
    assert len(lattice) == 8
    big = enumerate_semantics(
        parse("x = input s in {0,1};" * 1)
    )
    assert len(build_lattice(big, [], powerset=True)) == 4


def test_powerset_lattice_size_guard():
    program = parse(
        "a = input s in {0,1};\nb = input t in {0,1};\n"
        "c = input u in {0,1};\nd = input v in {0,1};\ne = input w in {0,1};"
    )
    with pytest.raises(NotALattice):
        build_lattice(enumerate_semantics(program), [], powerset=True)


def test_empty_semantics_rejected(access_control):
    _, semantics, _, _ = access_control
    import dataclasses

    hollow = dataclasses.replace(semantics, traces=())
    with pytest.raises(EmptySemantics):
        build_lattice(hollow, [])


# --- prediction abstraction -------------------------------------------------


def test_prediction_of_top_is_all_valid_prefixes(access_control):
    _, semantics, lattice, _ = access_control
    alpha = prediction_abstraction(semantics, lattice.top)
    assert alpha.member_prefixes == semantics.valid_prefixes


def test_prediction_of_bottom_is_empty(access_control):
    _, semantics, lattice, _ = access_control
    assert not prediction_abstraction(semantics, lattice.bottom).member_prefixes


def test_prediction_of_read_success(access_control):
    _, semantics, lattice, _ = access_control
    alpha = prediction_abstraction(semantics, lattice.by_name("RS"))
    guard = ("apv=1", "i1=1", "¬(i1==0)", "i2=1")
    expected = frozenset(
        p for p in semantics.valid_prefixes if p.texts()[: len(guard)] == guard
        and len(p) >= len(guard)
    )
    assert alpha.member_prefixes == expected


def test_prediction_not_prefix_closed_but_superset(access_control):
    _, semantics, lattice, _ = access_control
    RF = lattice.by_name("RF")
    alpha = prediction_abstraction(semantics, RF)
    assert RF.members <= alpha.member_prefixes
    # not prefix-closed: ε extends into RS traces, so it cannot guarantee RF
    from traceblame.events import EMPTY

    assert EMPTY not in alpha.member_prefixes
    short = prefix_by_texts(semantics, ["apv=1", "i1=0"])
    assert short in alpha.member_prefixes
    assert short[:1] not in alpha.member_prefixes


def test_galois_isomorphism_on_lattice(access_control):
    _, semantics, lattice, _ = access_control
    for prop in lattice:
        alpha = prediction_abstraction(semantics, prop)
        assert prediction_concretization(semantics, alpha) == prop.members


def test_concretization_examples(access_control):
    _, semantics, lattice, _ = access_control
    assert prediction_concretization(semantics, frozenset()) == frozenset()
    RF = lattice.by_name("RF")
    alpha = prediction_abstraction(semantics, RF)
    assert prediction_concretization(semantics, alpha) == RF.members
    assert len(RF.members) == 6


# --- leakage ------------------------------------------------------------------


def test_leaky_no_high_input_is_noninterfering():
    program = parse("l = input a in {0,1};\no = l;")
    semantics = enumerate_semantics(program)
    prop = property_leaky(semantics, ["a"], ["o"])
    assert prop.members == frozenset()


def test_leaky_direct_flow_everywhere():
    program = parse("h = input s in {0,1};\no = h;")
    semantics = enumerate_semantics(program)
    prop = property_leaky(semantics, [], ["o"])
    assert prop.members == semantics.trace_set


def test_leaky_guarded_flow_against_pairwise_oracle(leakage):
    _, semantics, lattice, _ = leakage
    prop = lattice.by_name("IL")

    # independent oracle: the quantified definition over rendered traces
    def low_in(t):
        return tuple(e.value for e in t if e.kind == "input" and e.source == "public")

    def low_out(t):
        return (final_env(t)["o"],)

    expected = set()
    for a in semantics.traces:
        for b in semantics.traces:
            if low_in(a) == low_in(b) and low_out(a) != low_out(b):
                expected.add(a)
    assert prop.members == frozenset(expected)
    assert all(t.texts()[1] == "l=1" for t in prop.members)
    assert len(prop.members) == 2


def test_leaky_unknown_names(leakage):
    _, semantics, _, _ = leakage
    with pytest.raises(UnknownName):
        property_leaky(semantics, ["nonesuch"], ["o"])
    with pytest.raises(UnknownName):
        property_leaky(semantics, ["public"], ["nonesuch"])
