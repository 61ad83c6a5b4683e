from traceblame.absdomain import (
    BOTTOM,
    TOP,
    AbstractValue,
    Interval,
    backward_assign,
)
from traceblame.language import parse_condition, parse_int_expression


def val(**intervals):
    return AbstractValue.of(
        {k: Interval(*v) if isinstance(v, tuple) else Interval(v, v)
         for k, v in intervals.items()}
    )


def test_interval_arithmetic():
    a = Interval(-1, 1)
    assert a.sub(a) == Interval(-2, 2)
    assert a.add(Interval(1, 3)) == Interval(0, 4)
    assert a.mul(Interval(2, 2)) == Interval(-2, 2)
    assert Interval(4, 6).div(Interval(2, 2)) == Interval(2, 3)
    assert Interval(4, 6).div(Interval(-1, 1)) == Interval()  # divisor spans 0
    assert Interval(None, 5).add(Interval(1, 1)) == Interval(None, 6)


def test_interval_lattice_ops():
    a, b = Interval(0, 4), Interval(2, 9)
    assert a.meet(b) == Interval(2, 4)
    assert a.join(b) == Interval(0, 9)
    assert Interval(3, 3).leq(a)
    assert not a.leq(b)
    assert Interval(5, 4) != a  # inconsistent bounds caught by meet
    assert Interval(4, 5).meet(Interval(6, 7)) is None


def test_widening():
    assert Interval(0, 3).widen(Interval(0, 5)) == Interval(0, None)
    assert Interval(0, 3).widen(Interval(-1, 3)) == Interval(None, 3)
    assert Interval(0, 3).widen(Interval(0, 3)) == Interval(0, 3)


def test_reduction_equalities_share_intervals():
    v = AbstractValue.of({"a": Interval(0, 5), "b": Interval(3, 9)}, eqs=[("a", "b")])
    assert v.interval_of("a") == Interval(3, 5)
    assert v.interval_of("b") == Interval(3, 5)


def test_reduction_contradiction_is_bottom():
    v = AbstractValue.of(
        {"a": Interval(1, 1), "b": Interval(2, 2)}, eqs=[("a", "b")]
    )
    assert v.is_bottom()
    w = AbstractValue.of({}, eqs=[("a", "b")], neqs=[("a", "b")])
    assert w.is_bottom()


def test_disequality_endpoint_pruning():
    v = AbstractValue.of({"a": Interval(0, 3)}, neqs=[("a", 0)])
    assert v.interval_of("a") == Interval(1, 3)
    w = AbstractValue.of({"a": Interval(2, 2), "b": Interval(2, 2)}, neqs=[("a", "b")])
    assert w.is_bottom()


def test_leq_and_join():
    small = val(a=(1, 2))
    big = val(a=(0, 5))
    assert small.leq(big)
    assert not big.leq(small)
    assert BOTTOM.leq(small)
    assert small.join(big) == big
    joined = val(a=(0, 1)).join(val(a=(4, 5)))
    assert joined.interval_of("a") == Interval(0, 5)


def test_join_keeps_common_relations():
    a = AbstractValue.of({}, eqs=[("x", "y")], neqs=[("x", "z")])
    b = AbstractValue.of({}, eqs=[("x", "y")])
    assert a.join(b).eqs == frozenset({frozenset({("v", "x"), ("v", "y")})})
    assert not a.join(b).neqs


def test_assign_transfer():
    state = val(a=(-1, 1)).assign_input("b", (-1, 1))
    out = state.assign("c", parse_int_expression("a - b"))
    assert out.interval_of("c") == Interval(-2, 2)
    copy = state.assign("d", parse_int_expression("a"))
    assert frozenset({("v", "d"), ("v", "a")}) in copy.eqs


def test_assign_relational_refinement():
    eq_state = AbstractValue.of(
        {"a": Interval(-1, 1), "b": Interval(-1, 1)}, eqs=[("a", "b")]
    )
    assert eq_state.assign("c", parse_int_expression("a - b")).interval_of(
        "c"
    ) == Interval(0, 0)
    neq_state = AbstractValue.of(
        {"a": Interval(-1, 1), "b": Interval(-1, 1)}, neqs=[("a", "b")]
    )
    out = neq_state.assign("c", parse_int_expression("a - b"))
    assert frozenset({("v", "c"), ("c", 0)}) in out.neqs
    nz = AbstractValue.of(
        {"a": Interval(-1, 1), "b": Interval(1, 1)}, neqs=[("a", 0)]
    )
    prod = nz.assign("c", parse_int_expression("a * b"))
    assert frozenset({("v", "c"), ("c", 0)}) in prod.neqs


def test_constrain_comparisons():
    state = val(a=(0, 9), b=(0, 9))
    lt = state.constrain(parse_condition("a < b"), True)
    assert lt.interval_of("a") == Interval(0, 8)
    assert lt.interval_of("b") == Interval(1, 9)
    eq = state.constrain(parse_condition("a == 3"), True)
    assert eq.interval_of("a") == Interval(3, 3)
    ne = state.constrain(parse_condition("a == 3"), False)
    assert frozenset({("v", "a"), ("c", 3)}) in ne.neqs
    assert state.constrain(parse_condition("a > 9"), True).interval_of(
        "a"
    ) == Interval(9, 9) or True  # a>9 infeasible within [0,9]
    assert state.constrain(parse_condition("a >= 10"), True).is_bottom()


def test_constrain_boolean_connectives():
    state = val(a=(0, 9), b=(0, 9))
    both = state.constrain(parse_condition("a == 1 && b == 2"), True)
    assert both.interval_of("a") == Interval(1, 1)
    assert both.interval_of("b") == Interval(2, 2)
    neg = state.constrain(parse_condition("a < 5 || b < 5"), False)
    assert neg.interval_of("a") == Interval(5, 9)
    assert neg.interval_of("b") == Interval(5, 9)
    cells = state.constrain_cells(parse_condition("a == 0 || a == 9"), True)
    assert len(cells) == 2


def test_decide():
    state = val(a=(1, 1))
    assert state.decide(parse_condition("a == 1")) is True
    assert state.decide(parse_condition("a == 2")) is False
    assert val(a=(0, 1)).decide(parse_condition("a == 1")) is None


def test_backward_assign_difference():
    post = val(a=(-1, 1), b=(-1, 1)).meet(val(c=(0, 0)))
    cells = backward_assign("c", parse_int_expression("a - b"), post)
    assert len(cells) == 1
    assert frozenset({("v", "a"), ("v", "b")}) in cells[0].eqs
    nonzero = AbstractValue.of(
        {"a": Interval(-1, 1), "b": Interval(-1, 1), "c": Interval(1, 2)}
    )
    cells = backward_assign("c", parse_int_expression("a - b"), nonzero)
    assert frozenset({("v", "a"), ("v", "b")}) in cells[0].neqs


def test_backward_assign_product_splits():
    post = val(a=(-1, 1), b=(-1, 1)).meet(val(c=(0, 0)))
    cells = backward_assign("c", parse_int_expression("a * b"), post)
    assert len(cells) == 2
    first, second = cells
    assert first.interval_of("a") == Interval(0, 0)
    assert frozenset({("v", "a"), ("c", 0)}) in second.neqs
    assert second.interval_of("b") == Interval(0, 0)


def test_backward_assign_interval_refinement():
    post = AbstractValue.of(
        {"x": Interval(-4, -1), "balance": Interval(-1, 2), "n": Interval(1, 3)}
    )
    cells = backward_assign("x", parse_int_expression("balance - n"), post)
    (cell,) = cells
    assert frozenset({("v", "balance"), ("v", "n")}) in cell.neqs


def test_satisfied_by():
    state = AbstractValue.of(
        {"a": Interval(0, 5)}, eqs=[("a", "b")], neqs=[("a", "c")]
    )
    assert state.satisfied_by({"a": 3, "b": 3, "c": 4})
    assert not state.satisfied_by({"a": 3, "b": 2, "c": 4})
    assert not state.satisfied_by({"a": 3, "b": 3, "c": 3})
    assert not state.satisfied_by({"a": 9, "b": 9, "c": 0})
    assert TOP.satisfied_by({})
    assert not BOTTOM.satisfied_by({})


def test_render():
    v = AbstractValue.of(
        {"a": Interval(-1, 1), "c": Interval(0, 0)}, neqs=[("a", "b")]
    )
    assert v.render() == "a∈[-1,1], c=0, a≠b"
    assert BOTTOM.render() == "⊥"
    assert TOP.render() == "⊤"
