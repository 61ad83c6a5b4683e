import pytest

from traceblame.language import (
    Assign,
    If,
    InputAssign,
    ParseError,
    ProgramError,
    parse,
    parse_condition,
    render_bool,
    render_int,
    trunc_div,
)

from conftest import example_text


def test_access_control_parses_with_three_sources(access_control):
    program, _, _, _ = access_control
    assert program.domains == {
        "input_1": (0, 1),
        "input_2": (0, 1),
        "input_3": (1, 2),
    }
    points = program.points
    assert points == tuple(f"L{i}" for i in range(1, 11))
    assert program.exit_point == "L11"


def test_minimal_program():
    program = parse("x = 1;")
    assert program.declarations == ()
    (stmt,) = program.body
    assert isinstance(stmt, Assign) and stmt.var == "x"


def test_withdrawal_program_sources(negative_balance):
    program, _, _, _ = negative_balance
    assert program.domains["query_database"] == (-1, 0, 1, 2)
    assert program.domains["amount"] == (1, 2, 3)
    assert all(v > 0 for v in program.domains["amount"])


def test_inline_input_declaration():
    program = parse("x = input s in {1,2,3};")
    assert program.domains == {"s": (1, 2, 3)}
    (stmt,) = program.body
    assert isinstance(stmt, InputAssign) and stmt.source == "s"


def test_syntax_error_carries_position():
    with pytest.raises(ParseError) as err:
        parse("x = ;")
    assert err.value.line == 1
    assert err.value.column >= 4


def test_empty_domain_rejected():
    with pytest.raises(ParseError):
        parse("input s in {};\nx = input s;")


def test_undeclared_source_rejected():
    with pytest.raises(ParseError):
        parse("x = input nowhere;")


def test_use_before_assignment_rejected():
    with pytest.raises(ProgramError):
        parse("x = y + 1;")
    with pytest.raises(ProgramError):
        # y only assigned on one branch
        parse("x = 1;\nif (x == 1) { y = 2; }\nz = y;")


def test_condition_rendering_is_canonical():
    cond = parse_condition("apv != 0 && i2 == 0")
    assert render_bool(cond) == "apv!=0&&i2==0"
    assert render_bool(parse_condition("a<1 || b>2 && c==3")) == "a<1||b>2&&c==3"
    assert render_bool(parse_condition("(a<1 || b>2) && c==3")) == "(a<1||b>2)&&c==3"
    assert render_bool(parse_condition("!(a == b)")) == "!(a==b)"


def test_int_rendering_minimal_parens():
    program = parse("x = 1;\ny = (x + 2) * 3;\nz = x + 2 * 3;")
    _, y, z = program.body
    assert render_int(y.expr) == "(x+2)*3"
    assert render_int(z.expr) == "x+2*3"


def test_ternary_parses_and_renders():
    program = parse("x = 1;\nd = (x==0) ? 2 : ((x==1) ? 1 : 0);")
    expr = program.body[1].expr
    assert render_int(expr) == "(x==0)?2:((x==1)?1:0)"


def test_nested_blocks_and_points():
    program = parse(
        "x = input s in {0,1};\nif (x == 0) { y = 1; } else { y = 2; }\nz = y;"
    )
    kinds = [type(s).__name__ for s in program.statements()]
    assert kinds == ["InputAssign", "If", "Assign", "Assign", "Assign"]
    assert [s.point for s in program.statements()] == ["L1", "L2", "L3", "L4", "L5"]


def test_truncating_division():
    assert trunc_div(7, 2) == 3
    assert trunc_div(-7, 2) == -3
    assert trunc_div(7, -2) == -3
    assert trunc_div(-7, -2) == 3


def test_comments_ignored():
    program = parse("// setup\nx = 1; // trailing\n")
    assert len(program.body) == 1
