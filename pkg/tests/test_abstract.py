"""The abstract pipeline on the two bug examples and the withdrawal program."""
import pytest

from traceblame import parse
from traceblame.absdomain import TOP, AbstractValue, Interval
from traceblame.abstract import (
    AbstractUserSpec,
    EmptySpec,
    EventualityOracle,
    IndistinguishableSpecs,
    abstract_observation,
    abstract_responsibility,
    analyze_abstract,
    build_automaton,
    build_cfg,
    forward_analysis,
    strengthen,
)
from traceblame.language import parse_condition
from traceblame.semantics import enumerate_semantics, replay_states


def bug_spec(program, expr="c == 0"):
    return AbstractUserSpec.for_exit_condition(program, parse_condition(expr))


def node_by_invariant(automaton, point, fragment):
    found = [
        n
        for n in automaton.nodes
        if n.point == point and fragment in n.invariant.render()
    ]
    assert len(found) == 1, f"{point}/{fragment}: {found}"
    return found[0]


# --- forward analysis ------------------------------------------------------------


def test_forward_invariants_difference(diff_inputs):
    program, _, _, _ = diff_inputs
    inv = forward_analysis(program)
    assert inv["L3"].interval_of("a") == Interval(-1, 1)
    assert inv["L3"].interval_of("b") == Interval(-1, 1)
    assert inv["L4"].interval_of("c") == Interval(-2, 2)


def test_forward_straight_line():
    program = parse("x = 1;")
    inv = forward_analysis(program)
    assert inv[program.exit_point].interval_of("x") == Interval(1, 1)


def test_forward_access_control_apv_range(access_control):
    """After the two approval tests, apv is 0 or 1; cross-checked against
    the concrete reachable values at that point."""
    program, semantics, _, _ = access_control
    inv = forward_analysis(program)
    at_typ = inv["L8"]  # the system-settings input follows the tests
    assert at_typ.interval_of("apv") == Interval(0, 1)
    concrete = set()
    for trace in semantics.traces:
        for point, env in replay_states(program, trace):
            if point == "L8":
                concrete.add(env["apv"])
                assert at_typ.satisfied_by(env)
    assert concrete == {0, 1}


def test_forward_loop_widening_terminates():
    program = parse(
        "n = input s in {1,2,3};\ni = 0;\nwhile (i < n) { i = i + 1; }"
    )
    inv = forward_analysis(program)
    exit_inv = inv[program.exit_point]
    for trace in enumerate_semantics(program).traces:
        env = {}
        for e in trace:
            if e.kind in ("assign", "input"):
                env[e.var] = e.value
        assert exit_inv.satisfied_by(env)


def test_forward_over_approximates_all_reachable_states(house_fire):
    program, semantics, _, _ = house_fire
    inv = forward_analysis(program)
    for trace in semantics.traces:
        for point, env in replay_states(program, trace):
            assert inv[point].satisfied_by(env)


# --- strengthening ------------------------------------------------------------------


def test_strengthen_difference_example(diff_inputs):
    program, _, _, _ = diff_inputs
    inv = forward_analysis(program)
    st = strengthen(program, inv, bug_spec(program))
    (pb_l3,) = st.pb_cells["L3"]
    assert frozenset({("v", "a"), ("v", "b")}) in pb_l3.eqs
    assert pb_l3.interval_of("a") == Interval(-1, 1)
    (pnb_l3,) = st.pnb_cells["L3"]
    assert frozenset({("v", "a"), ("v", "b")}) in pnb_l3.neqs
    (pb_l4,) = st.pb_cells["L4"]
    assert pb_l4.interval_of("c") == Interval(0, 0)
    # before the second input nothing distinguishes the outcomes
    assert st.pb_cells["L2"] == st.pnb_cells["L2"]


def test_strengthen_identity_when_specs_true(diff_inputs):
    program, _, _, _ = diff_inputs
    inv = forward_analysis(program)
    user = AbstractUserSpec(pb={program.exit_point: TOP}, pnb={program.exit_point: TOP})
    st = strengthen(program, inv, user)
    for point in (*program.points, program.exit_point):
        assert st.tbar[point] == inv[point]
        for cell in (*st.pb_cells[point], *st.pnb_cells[point]):
            assert inv[point].leq(cell) or cell.leq(inv[point])


def test_strengthen_withdrawal_backward_guard(negative_balance):
    """The overdraft spec pushes back to 'amount differs from the opening
    balance' plus the interval information; concretely every overdraft run
    satisfies the refined cell."""
    program, semantics, _, _ = negative_balance
    inv = forward_analysis(program)
    user = AbstractUserSpec.for_exit_condition(
        program, parse_condition("balance < 0")
    )
    st = strengthen(program, inv, user)
    (cell,) = st.pb_cells["L3"]
    assert frozenset({("v", "balance"), ("v", "n")}) in cell.neqs
    assert cell.interval_of("balance") == Interval(-1, 2)
    assert cell.interval_of("n") == Interval(1, 3)
    from traceblame.semantics import final_env

    for trace in semantics.traces:
        if final_env(trace)["balance"] < 0:
            env_l3 = {"balance": trace[0].value, "n": trace[1].value}
            assert cell.satisfied_by(env_l3)


def test_strengthen_rejects_unsatisfiable_spec(diff_inputs):
    program, _, _, _ = diff_inputs
    inv = forward_analysis(program)
    user = AbstractUserSpec(
        pb={program.exit_point: TOP.constrain(parse_condition("c > 99"), True)},
        pnb={program.exit_point: TOP.constrain(parse_condition("c < -99"), True)},
    )
    with pytest.raises(EmptySpec):
        strengthen(program, inv, user)


# --- automaton construction -----------------------------------------------------------


def test_difference_automaton_shape(diff_inputs):
    program, _, _, _ = diff_inputs
    inv = forward_analysis(program)
    st = strengthen(program, inv, bug_spec(program))
    automaton = build_automaton(program, st)
    by_point = {}
    for n in automaton.nodes:
        by_point.setdefault(n.point, []).append(n)
    assert len(by_point["L1"]) == 1 and len(by_point["L2"]) == 1
    assert len(by_point["L3"]) == 2  # split: a=b / a≠b
    assert len(by_point["L4"]) == 2  # terminals: c=0 / c≠0
    eq_node = node_by_invariant(automaton, "L3", "a=b")
    neq_node = node_by_invariant(automaton, "L3", "a≠b")
    # the split is exclusive: each L3 node reaches exactly one terminal
    assert {m.point for m, _ in automaton.successors(eq_node)} == {"L4"}
    assert len(automaton.successors(eq_node)) == 1
    assert len(automaton.successors(neq_node)) == 1
    terminals = dict(automaton.terminal_class)
    assert sorted(terminals.values()) == ["b", "nb"]


def test_product_automaton_splits_second_point(prod_inputs):
    program, _, _, _ = prod_inputs
    inv = forward_analysis(program)
    st = strengthen(program, inv, bug_spec(program))
    automaton = build_automaton(program, st)
    l2_nodes = [n for n in automaton.nodes if n.point == "L2"]
    assert len(l2_nodes) == 2
    renders = sorted(n.invariant.render() for n in l2_nodes)
    assert renders[0] == "a=0"
    assert "a≠0" in renders[1]
    l3_nodes = [n for n in automaton.nodes if n.point == "L3"]
    assert len(l3_nodes) == 3


def test_no_split_without_distinguishing_information():
    program = parse("x = input s in {0,1};\ny = x;")
    user = AbstractUserSpec(
        pb={program.exit_point: TOP}, pnb={program.exit_point: TOP}
    )
    with pytest.raises(IndistinguishableSpecs):
        inv = forward_analysis(program)
        build_automaton(program, strengthen(program, inv, user))


def test_plain_cfg_when_specs_equal_everywhere():
    program = parse("x = input s in {0,1};\ny = input t in {0,1};\nz = x + y;")
    user = bug_spec(program, "z == 0")
    inv = forward_analysis(program)
    st = strengthen(program, inv, user)
    automaton = build_automaton(program, st)
    # z==0 forces x=0,y=0 backwards, z!=0 gives no relation: L1 keeps one node
    l1 = [n for n in automaton.nodes if n.point == "L1"]
    assert len(l1) == 1


# --- marks ------------------------------------------------------------------------


def test_difference_marks_exact_oracle(diff_inputs):
    program, _, _, _ = diff_inputs
    user = bug_spec(program)
    automaton, marks, _ = analyze_abstract(program, user, "b")
    assert marks[node_by_invariant(automaton, "L3", "a=b")] == "Pb"
    assert marks[node_by_invariant(automaton, "L3", "a≠b")] == "P¬b"
    (l2,) = [n for n in automaton.nodes if n.point == "L2"]
    (l1,) = [n for n in automaton.nodes if n.point == "L1"]
    assert marks[l2] == "Pb/P¬b"
    assert marks[l1] == "Pb/P¬b"


def test_difference_marks_disabled_oracle(diff_inputs):
    program, _, _, _ = diff_inputs
    user = bug_spec(program)
    automaton, marks, _ = analyze_abstract(
        program, user, "b", oracle=EventualityOracle.disabled()
    )
    (l2,) = [n for n in automaton.nodes if n.point == "L2"]
    (l1,) = [n for n in automaton.nodes if n.point == "L1"]
    assert marks[l1] == "⊤" and marks[l2] == "⊤"
    assert marks[node_by_invariant(automaton, "L3", "a=b")] == "Pb"


def test_product_marks_disabled_oracle(prod_inputs):
    program, _, _, _ = prod_inputs
    user = bug_spec(program)
    automaton, marks, _ = analyze_abstract(
        program, user, "b", oracle=EventualityOracle.disabled()
    )
    dead = node_by_invariant(automaton, "L3", "b=0")
    assert marks[dead] == "Pb"  # the abstractly alive, concretely dead cell
    l2b = node_by_invariant(automaton, "L2", "a≠0")
    assert marks[l2b] == "⊤"


def test_marking_is_idempotent(diff_inputs):
    program, _, _, _ = diff_inputs
    user = bug_spec(program)
    oracle = EventualityOracle.exact(program, user)
    automaton, marks, _ = analyze_abstract(program, user, "b", oracle=oracle)
    again = abstract_observation(automaton, oracle)
    assert again == marks


# --- verdicts ----------------------------------------------------------------------


def test_difference_definite_verdict(diff_inputs):
    program, _, _, _ = diff_inputs
    _, _, verdicts = analyze_abstract(program, bug_spec(program), "b")
    assert {a.label for a in verdicts.definite_actions} == {"b = input_2()"}
    assert not verdicts.potential


def test_difference_degrades_to_potential(diff_inputs):
    program, _, _, _ = diff_inputs
    _, _, verdicts = analyze_abstract(
        program, bug_spec(program), "b", oracle=EventualityOracle.disabled()
    )
    assert not verdicts.definite
    assert {a.label for a in verdicts.potential_actions} == {
        "a = input_1()",
        "b = input_2()",
    }


def test_product_potential_includes_first_input(prod_inputs):
    program, _, _, _ = prod_inputs
    for oracle in (None, EventualityOracle.disabled()):
        _, _, verdicts = analyze_abstract(
            program, bug_spec(program), "b", oracle=oracle
        )
        labels = {a.label for a in verdicts.potential_actions}
        assert "a = input_1()" in labels
        assert not verdicts.definite


def test_opposite_class_verdict(diff_inputs):
    program, _, _, _ = diff_inputs
    _, _, verdicts = analyze_abstract(program, bug_spec(program), "nb")
    assert {a.label for a in verdicts.definite_actions} == {"b = input_2()"}


# --- oracle -----------------------------------------------------------------------


def test_oracle_exact_answers(diff_inputs):
    program, _, _, _ = diff_inputs
    user = bug_spec(program)
    automaton, _, _ = analyze_abstract(program, user, "b")
    oracle = EventualityOracle.exact(program, user)
    (l2,) = [n for n in automaton.nodes if n.point == "L2"]
    assert oracle.definitely_reaches(l2, "b") is True
    assert oracle.definitely_reaches(l2, "nb") is True
    eq_node = node_by_invariant(automaton, "L3", "a=b")
    assert oracle.confirms(eq_node, frozenset({"b"}))
    assert not oracle.confirms(eq_node, frozenset({"b", "nb"}))
    assert EventualityOracle.disabled().definitely_reaches(l2, "b") is None


def test_oracle_rejects_unreachable_invariants(prod_inputs):
    program, _, _, _ = prod_inputs
    user = bug_spec(program)
    inv = forward_analysis(program)
    st = strengthen(program, inv, user)
    automaton = build_automaton(program, st)
    oracle = EventualityOracle.exact(program, user)
    dead = node_by_invariant(automaton, "L3", "b=0")
    assert not oracle.confirms(dead, frozenset({"b"}))  # b is never 0


# --- cfg ---------------------------------------------------------------------------


def test_cfg_structure(access_control):
    program, _, _, _ = access_control
    entry, exit_point, edges, loop_heads = build_cfg(program)
    assert entry == "L1" and exit_point == "L11"
    assert not loop_heads
    test_edges = [e for e in edges if e.action.kind == "test"]
    assert len(test_edges) == 6  # three ifs, two outcomes each
    program2 = parse("x = 1;\nwhile (x > 0) { x = x - 1; }")
    _, _, edges2, heads2 = build_cfg(program2)
    assert heads2 == frozenset({"L2"})
    assert any(e.dst == "L2" and e.src == "L3" for e in edges2)  # back edge
