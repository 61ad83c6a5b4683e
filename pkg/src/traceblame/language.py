"""The analyzed toy imperative language: AST, parser, and renderers.

Grammar (statements get unique points L1, L2, ... in source order; the
program exit gets the next label):

    program := decl* stmt*
    decl    := "input" IDENT "in" "{" INT ("," INT)* "}" ";"
    stmt    := IDENT "=" expr ";"
            |  IDENT "=" "input" IDENT ("in" "{" INT ("," INT)* "}")? ";"
            |  "if" "(" bexpr ")" block ("else" block)?
            |  "while" "(" bexpr ")" block
    expr    := integer arithmetic over + - * / and ternary `bexpr ? e : e`
    bexpr   := comparisons (==, !=, <, <=, >, >=) combined with &&, ||, !

Integer division truncates toward zero (C-style); dividing by zero is a
designated runtime event, handled by the interpreter.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


class ParseError(Exception):
    """Syntax or domain error, with source position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class ProgramError(Exception):
    """Semantic error in a parsed program (bad domain, undefined variable)."""


# --- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * /
    left: "IntExpr"
    right: "IntExpr"


@dataclass(frozen=True)
class Ternary:
    cond: "BoolExpr"
    then: "IntExpr"
    orelse: "IntExpr"


@dataclass(frozen=True)
class Compare:
    op: str  # == != < <= > >=
    left: "IntExpr"
    right: "IntExpr"


@dataclass(frozen=True)
class And:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class Or:
    left: "BoolExpr"
    right: "BoolExpr"


@dataclass(frozen=True)
class Not:
    operand: "BoolExpr"


IntExpr = Union[IntLit, Var, BinOp, Ternary]
BoolExpr = Union[Compare, And, Or, Not]


# --- statements ------------------------------------------------------------

@dataclass(frozen=True)
class Assign:
    point: str
    var: str
    expr: IntExpr


@dataclass(frozen=True)
class InputAssign:
    point: str
    var: str
    source: str


@dataclass(frozen=True)
class If:
    point: str
    cond: BoolExpr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...]


@dataclass(frozen=True)
class While:
    point: str
    cond: BoolExpr
    body: tuple["Stmt", ...]


Stmt = Union[Assign, InputAssign, If, While]


@dataclass(frozen=True)
class Program:
    """Parsed program: declared finite input sources plus a labelled body."""

    declarations: tuple[tuple[str, tuple[int, ...]], ...]
    body: tuple[Stmt, ...]

    @property
    def domains(self) -> dict[str, tuple[int, ...]]:
        return dict(self.declarations)

    @property
    def source_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.declarations)

    def statements(self) -> Iterator[Stmt]:
        """All statements in point order, including nested ones."""
        def walk(stmts):
            for s in stmts:
                yield s
                if isinstance(s, If):
                    yield from walk(s.then)
                    yield from walk(s.orelse)
                elif isinstance(s, While):
                    yield from walk(s.body)
        yield from walk(self.body)

    @property
    def points(self) -> tuple[str, ...]:
        return tuple(s.point for s in self.statements())

    @property
    def exit_point(self) -> str:
        return f"L{len(self.points) + 1}"

    def statement_at(self, point: str) -> Stmt:
        for s in self.statements():
            if s.point == point:
                return s
        raise KeyError(point)

    def variables(self) -> set[str]:
        out: set[str] = set()
        for s in self.statements():
            if isinstance(s, (Assign, InputAssign)):
                out.add(s.var)
        return out


# --- evaluation ------------------------------------------------------------

def trunc_div(a: int, b: int) -> int:
    """Integer division truncating toward zero."""
    q = a // b
    if a % b != 0 and (a < 0) != (b < 0):
        q += 1
    return q


def int_vars(expr: IntExpr) -> set[str]:
    if isinstance(expr, IntLit):
        return set()
    if isinstance(expr, Var):
        return {expr.name}
    if isinstance(expr, BinOp):
        return int_vars(expr.left) | int_vars(expr.right)
    if isinstance(expr, Ternary):
        return bool_vars(expr.cond) | int_vars(expr.then) | int_vars(expr.orelse)
    raise TypeError(expr)


def bool_vars(expr: BoolExpr) -> set[str]:
    if isinstance(expr, Compare):
        return int_vars(expr.left) | int_vars(expr.right)
    if isinstance(expr, (And, Or)):
        return bool_vars(expr.left) | bool_vars(expr.right)
    if isinstance(expr, Not):
        return bool_vars(expr.operand)
    raise TypeError(expr)


def eval_int(expr: IntExpr, env: dict[str, int]) -> int:
    if isinstance(expr, IntLit):
        return expr.value
    if isinstance(expr, Var):
        if expr.name not in env:
            raise ProgramError(f"variable {expr.name!r} used before assignment")
        return env[expr.name]
    if isinstance(expr, BinOp):
        left = eval_int(expr.left, env)
        right = eval_int(expr.right, env)
        if expr.op == "+":
            return left + right
        if expr.op == "-":
            return left - right
        if expr.op == "*":
            return left * right
        if expr.op == "/":
            if right == 0:
                raise ZeroDivisionError(left)
            return trunc_div(left, right)
        raise TypeError(f"unknown operator {expr.op!r}")
    if isinstance(expr, Ternary):
        branch = expr.then if eval_bool(expr.cond, env) else expr.orelse
        return eval_int(branch, env)
    raise TypeError(expr)


_CMP = {
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
}


def eval_bool(expr: BoolExpr, env: dict[str, int]) -> bool:
    if isinstance(expr, Compare):
        return _CMP[expr.op](eval_int(expr.left, env), eval_int(expr.right, env))
    if isinstance(expr, And):
        return eval_bool(expr.left, env) and eval_bool(expr.right, env)
    if isinstance(expr, Or):
        return eval_bool(expr.left, env) or eval_bool(expr.right, env)
    if isinstance(expr, Not):
        return not eval_bool(expr.operand, env)
    raise TypeError(expr)


# --- rendering -------------------------------------------------------------
#
# Event text is canonical: no whitespace, parentheses only where precedence
# requires them, so `apv!=0&&i2==0` renders exactly like that.

_INT_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def render_int(expr: IntExpr, parent_prec: int = 0) -> str:
    if isinstance(expr, IntLit):
        return str(expr.value)
    if isinstance(expr, Var):
        return expr.name
    if isinstance(expr, BinOp):
        prec = _INT_PREC[expr.op]
        text = f"{render_int(expr.left, prec)}{expr.op}{render_int(expr.right, prec + 1)}"
        return f"({text})" if prec < parent_prec else text
    if isinstance(expr, Ternary):
        text = f"({render_bool(expr.cond)})?{render_int(expr.then, 9)}:{render_int(expr.orelse, 9)}"
        return f"({text})" if parent_prec > 0 else text
    raise TypeError(expr)


def render_bool(expr: BoolExpr, parent_prec: int = 0) -> str:
    # precedence: || (1) < && (2) < ! (3) < comparison (4)
    if isinstance(expr, Compare):
        return f"{render_int(expr.left, 1)}{expr.op}{render_int(expr.right, 1)}"
    if isinstance(expr, Or):
        text = f"{render_bool(expr.left, 1)}||{render_bool(expr.right, 1)}"
        return f"({text})" if parent_prec > 1 else text
    if isinstance(expr, And):
        text = f"{render_bool(expr.left, 2)}&&{render_bool(expr.right, 2)}"
        return f"({text})" if parent_prec > 2 else text
    if isinstance(expr, Not):
        return f"!({render_bool(expr.operand)})"
    raise TypeError(expr)


# --- tokenizer -------------------------------------------------------------

_KEYWORDS = {"input", "in", "if", "else", "while"}
_SYMBOLS = (
    "==", "!=", "<=", ">=", "&&", "||",
    "=", "<", ">", "!", "+", "-", "*", "/", "?", ":",
    ";", ",", "{", "}", "(", ")",
)


@dataclass(frozen=True)
class _Token:
    kind: str  # ident, int, symbol, keyword, eof
    value: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if ch in " \t\r":
            i, col = i + 1, col + 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = "keyword" if word in _KEYWORDS else "ident"
            tokens.append(_Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        for sym in _SYMBOLS:
            if text.startswith(sym, i):
                tokens.append(_Token("symbol", sym, line, col))
                col += len(sym)
                i += len(sym)
                break
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("eof", "", line, col))
    return tokens


# --- parser ----------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0
        self.decls: dict[str, tuple[int, ...]] = {}
        self.decl_order: list[str] = []
        self.point_counter = 0

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.column)

    def expect(self, kind: str, value: str | None = None) -> _Token:
        tok = self.peek()
        if tok.kind != kind or (value is not None and tok.value != value):
            want = value if value is not None else kind
            raise self.error(f"expected {want!r}, found {tok.value or tok.kind!r}")
        return self.next()

    def accept(self, kind: str, value: str | None = None) -> _Token | None:
        tok = self.peek()
        if tok.kind == kind and (value is None or tok.value == value):
            return self.next()
        return None

    def fresh_point(self) -> str:
        self.point_counter += 1
        return f"L{self.point_counter}"

    # top level

    def parse_program(self) -> Program:
        while self.peek().kind == "keyword" and self.peek().value == "input":
            self.parse_decl()
        body = []
        while self.peek().kind != "eof":
            body.append(self.parse_stmt())
        return Program(
            declarations=tuple((name, self.decls[name]) for name in self.decl_order),
            body=tuple(body),
        )

    def parse_decl(self) -> None:
        self.expect("keyword", "input")
        name = self.expect("ident").value
        self.expect("keyword", "in")
        domain = self.parse_domain(name)
        self.expect("symbol", ";")
        self.declare(name, domain)

    def declare(self, name: str, domain: tuple[int, ...]) -> None:
        if name in self.decls:
            raise self.error(f"input source {name!r} declared twice")
        self.decls[name] = domain
        self.decl_order.append(name)

    def parse_domain(self, name: str) -> tuple[int, ...]:
        self.expect("symbol", "{")
        values: list[int] = []
        if self.peek().value != "}":
            values.append(self.parse_int_const())
            while self.accept("symbol", ","):
                values.append(self.parse_int_const())
        self.expect("symbol", "}")
        if not values:
            raise self.error(f"input source {name!r} has an empty domain")
        return tuple(values)

    def parse_int_const(self) -> int:
        sign = -1 if self.accept("symbol", "-") else 1
        return sign * int(self.expect("int").value)

    # statements

    def parse_stmt(self) -> Stmt:
        tok = self.peek()
        if tok.kind == "keyword" and tok.value == "if":
            return self.parse_if()
        if tok.kind == "keyword" and tok.value == "while":
            return self.parse_while()
        if tok.kind == "ident":
            return self.parse_assign()
        raise self.error(f"expected a statement, found {tok.value or tok.kind!r}")

    def parse_assign(self) -> Stmt:
        var = self.expect("ident").value
        self.expect("symbol", "=")
        point = self.fresh_point()
        if self.peek().kind == "keyword" and self.peek().value == "input":
            self.next()
            source = self.expect("ident").value
            if self.accept("keyword", "in"):
                domain = self.parse_domain(source)
                self.declare(source, domain)
            elif source not in self.decls:
                raise self.error(f"input source {source!r} is not declared")
            self.expect("symbol", ";")
            return InputAssign(point, var, source)
        expr = self.parse_expr()
        self.expect("symbol", ";")
        return Assign(point, var, expr)

    def parse_if(self) -> If:
        self.expect("keyword", "if")
        point = self.fresh_point()
        self.expect("symbol", "(")
        cond = self.parse_bexpr()
        self.expect("symbol", ")")
        then = self.parse_block()
        orelse: tuple[Stmt, ...] = ()
        if self.accept("keyword", "else"):
            orelse = self.parse_block()
        return If(point, cond, then, orelse)

    def parse_while(self) -> While:
        self.expect("keyword", "while")
        point = self.fresh_point()
        self.expect("symbol", "(")
        cond = self.parse_bexpr()
        self.expect("symbol", ")")
        return While(point, cond, self.parse_block())

    def parse_block(self) -> tuple[Stmt, ...]:
        self.expect("symbol", "{")
        stmts = []
        while self.peek().value != "}":
            stmts.append(self.parse_stmt())
        self.expect("symbol", "}")
        return tuple(stmts)

    # expressions; a ternary may open with a parenthesized bexpr, so the
    # primary parser backtracks between the two readings of "("

    def parse_expr(self) -> IntExpr:
        start = self.pos
        try:
            cond = self.parse_bexpr()
            if self.accept("symbol", "?"):
                then = self.parse_expr()
                self.expect("symbol", ":")
                return Ternary(cond, then, self.parse_expr())
        except ParseError:
            pass
        self.pos = start
        return self.parse_arith()

    def parse_arith(self) -> IntExpr:
        expr = self.parse_term()
        while self.peek().value in ("+", "-") and self.peek().kind == "symbol":
            op = self.next().value
            expr = BinOp(op, expr, self.parse_term())
        return expr

    def parse_term(self) -> IntExpr:
        expr = self.parse_atom()
        while self.peek().value in ("*", "/") and self.peek().kind == "symbol":
            op = self.next().value
            expr = BinOp(op, expr, self.parse_atom())
        return expr

    def parse_atom(self) -> IntExpr:
        tok = self.peek()
        if tok.kind == "int":
            self.next()
            return IntLit(int(tok.value))
        if tok.kind == "ident":
            self.next()
            return Var(tok.value)
        if self.accept("symbol", "-"):
            inner = self.parse_atom()
            if isinstance(inner, IntLit):
                return IntLit(-inner.value)
            return BinOp("-", IntLit(0), inner)
        if self.accept("symbol", "("):
            expr = self.parse_expr()
            self.expect("symbol", ")")
            return expr
        raise self.error(f"expected an expression, found {tok.value or tok.kind!r}")

    def parse_bexpr(self) -> BoolExpr:
        expr = self.parse_bterm()
        while self.accept("symbol", "||"):
            expr = Or(expr, self.parse_bterm())
        return expr

    def parse_bterm(self) -> BoolExpr:
        expr = self.parse_bfactor()
        while self.accept("symbol", "&&"):
            expr = And(expr, self.parse_bfactor())
        return expr

    def parse_bfactor(self) -> BoolExpr:
        if self.accept("symbol", "!"):
            return Not(self.parse_bfactor())
        if self.peek().value == "(":
            start = self.pos
            self.next()
            try:
                inner = self.parse_bexpr()
                self.expect("symbol", ")")
                return inner
            except ParseError:
                self.pos = start
        return self.parse_compare()

    def parse_compare(self) -> Compare:
        left = self.parse_arith()
        tok = self.peek()
        if tok.kind == "symbol" and tok.value in _CMP:
            self.next()
            return Compare(tok.value, left, self.parse_arith())
        raise self.error("expected a comparison operator")


def parse_condition(text: str) -> BoolExpr:
    """Parse a standalone boolean expression (used by spec files)."""
    parser = _Parser(text)
    expr = parser.parse_bexpr()
    parser.expect("eof")
    return expr


def parse_int_expression(text: str) -> IntExpr:
    """Parse a standalone integer expression."""
    parser = _Parser(text)
    expr = parser.parse_expr()
    parser.expect("eof")
    return expr


def parse(text: str) -> Program:
    """Parse source text into a labelled Program.

    Raises ParseError with line/column on malformed input and on empty
    input domains; validates that every variable is assigned before use
    on every path.
    """
    program = _Parser(text).parse_program()
    _check_defined_before_use(program)
    return program


def _check_defined_before_use(program: Program) -> None:
    def walk(stmts: tuple[Stmt, ...], defined: set[str]) -> set[str]:
        for s in stmts:
            if isinstance(s, Assign):
                missing = int_vars(s.expr) - defined
                if missing:
                    raise ProgramError(
                        f"variable {sorted(missing)[0]!r} used before assignment at {s.point}"
                    )
                defined = defined | {s.var}
            elif isinstance(s, InputAssign):
                defined = defined | {s.var}
            elif isinstance(s, If):
                missing = bool_vars(s.cond) - defined
                if missing:
                    raise ProgramError(
                        f"variable {sorted(missing)[0]!r} used before assignment at {s.point}"
                    )
                then_defined = walk(s.then, defined)
                else_defined = walk(s.orelse, defined)
                defined = then_defined & else_defined
            elif isinstance(s, While):
                missing = bool_vars(s.cond) - defined
                if missing:
                    raise ProgramError(
                        f"variable {sorted(missing)[0]!r} used before assignment at {s.point}"
                    )
                walk(s.body, defined)  # body may not run; do not extend
        return defined

    walk(program.body, set())
