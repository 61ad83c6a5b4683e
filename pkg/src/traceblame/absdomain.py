"""Reduced product of integer intervals and symbolic (dis)equalities.

An abstract value constrains program variables by an interval each plus a
set of equalities/disequalities between variables (or between a variable
and a constant, for disequalities; an equality with a constant collapses
into a point interval).  Reduction keeps the parts consistent:

* variables in one equality class share the meet of their intervals;
* an equality contradicting a disequality is bottom;
* a disequality against a value at an interval endpoint shaves the
  endpoint off (singleton-overlap pruning only; no richer relations).

Unsatisfiable values are canonicalized to a single bottom.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Union

from .language import (
    And,
    BinOp,
    BoolExpr,
    Compare,
    IntExpr,
    IntLit,
    Not,
    Or,
    Ternary,
    Var,
    trunc_div,
)

NEG = ("==", "!="), ("!=", "=="), ("<", ">="), (">=", "<"), (">", "<="), ("<=", ">")
_NEGATE = dict(NEG)
_FLIP = {"==": "==", "!=": "!=", "<": ">", ">": "<", "<=": ">=", ">=": "<="}


@dataclass(frozen=True)
class Interval:
    """[lo, hi] with None for an unbounded end; never empty (emptiness is
    handled at the AbstractValue level as bottom)."""

    lo: Optional[int] = None
    hi: Optional[int] = None

    def is_top(self) -> bool:
        return self.lo is None and self.hi is None

    def contains(self, value: int) -> bool:
        if self.lo is not None and value < self.lo:
            return False
        if self.hi is not None and value > self.hi:
            return False
        return True

    def is_singleton(self) -> bool:
        return self.lo is not None and self.lo == self.hi

    def leq(self, other: "Interval") -> bool:
        lo_ok = other.lo is None or (self.lo is not None and self.lo >= other.lo)
        hi_ok = other.hi is None or (self.hi is not None and self.hi <= other.hi)
        return lo_ok and hi_ok

    def join(self, other: "Interval") -> "Interval":
        lo = None if self.lo is None or other.lo is None else min(self.lo, other.lo)
        hi = None if self.hi is None or other.hi is None else max(self.hi, other.hi)
        return Interval(lo, hi)

    def meet(self, other: "Interval") -> Optional["Interval"]:
        lo = other.lo if self.lo is None else (self.lo if other.lo is None else max(self.lo, other.lo))
        hi = other.hi if self.hi is None else (self.hi if other.hi is None else min(self.hi, other.hi))
        if lo is not None and hi is not None and lo > hi:
            return None
        return Interval(lo, hi)

    def widen(self, other: "Interval") -> "Interval":
        lo = self.lo if self.lo is not None and other.lo is not None and other.lo >= self.lo else None
        hi = self.hi if self.hi is not None and other.hi is not None and other.hi <= self.hi else None
        return Interval(lo, hi)

    def shift(self, delta: int) -> "Interval":
        return Interval(
            None if self.lo is None else self.lo + delta,
            None if self.hi is None else self.hi + delta,
        )

    def add(self, other: "Interval") -> "Interval":
        lo = None if self.lo is None or other.lo is None else self.lo + other.lo
        hi = None if self.hi is None or other.hi is None else self.hi + other.hi
        return Interval(lo, hi)

    def sub(self, other: "Interval") -> "Interval":
        lo = None if self.lo is None or other.hi is None else self.lo - other.hi
        hi = None if self.hi is None or other.lo is None else self.hi - other.lo
        return Interval(lo, hi)

    def mul(self, other: "Interval") -> "Interval":
        if None in (self.lo, self.hi, other.lo, other.hi):
            return Interval()
        products = [a * b for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
        return Interval(min(products), max(products))

    def div(self, other: "Interval") -> "Interval":
        # sound only when the divisor excludes zero; otherwise top
        if None in (self.lo, self.hi, other.lo, other.hi) or other.contains(0):
            return Interval()
        quotients = [
            trunc_div(a, b) for a in (self.lo, self.hi) for b in (other.lo, other.hi)
        ]
        return Interval(min(quotients), max(quotients))

    def render(self) -> str:
        lo = "-∞" if self.lo is None else str(self.lo)
        hi = "+∞" if self.hi is None else str(self.hi)
        return f"[{lo},{hi}]"


TOP_INTERVAL = Interval()

Term = Union[str, int]  # a variable name or an integer constant


def _pair(a: Term, b: Term) -> frozenset:
    return frozenset({("v", a) if isinstance(a, str) else ("c", a),
                      ("v", b) if isinstance(b, str) else ("c", b)})


@dataclass(frozen=True)
class AbstractValue:
    """Conjunction of per-variable intervals plus (dis)equality relations."""

    intervals: tuple = ()  # sorted tuple of (var, Interval)
    eqs: frozenset = frozenset()  # frozensets of two ("v", name) terms
    neqs: frozenset = frozenset()  # frozensets of ("v"/"c", value) terms
    bottom: bool = False

    # -- construction ---------------------------------------------------------

    @classmethod
    def top(cls) -> "AbstractValue":
        return TOP

    @classmethod
    def make_bottom(cls) -> "AbstractValue":
        return BOTTOM

    @classmethod
    def of(
        cls,
        intervals: dict | None = None,
        eqs: Iterable[tuple[str, str]] = (),
        neqs: Iterable[tuple[Term, Term]] = (),
    ) -> "AbstractValue":
        value = cls(
            intervals=tuple(sorted((intervals or {}).items())),
            eqs=frozenset(_pair(a, b) for a, b in eqs),
            neqs=frozenset(_pair(a, b) for a, b in neqs),
        )
        return value.reduce()

    def interval_of(self, var: str) -> Interval:
        for name, iv in self.intervals:
            if name == var:
                return iv
        return TOP_INTERVAL

    def _interval_map(self) -> dict:
        return dict(self.intervals)

    def replace(self, intervals: dict, eqs: frozenset, neqs: frozenset) -> "AbstractValue":
        cleaned = {v: iv for v, iv in intervals.items() if not iv.is_top()}
        return AbstractValue(
            intervals=tuple(sorted(cleaned.items())), eqs=eqs, neqs=neqs
        )

    # -- normalization --------------------------------------------------------

    def reduce(self) -> "AbstractValue":
        """Propagate equalities into intervals, prune endpoint disequalities,
        detect unsatisfiability."""
        if self.bottom:
            return BOTTOM
        intervals = self._interval_map()
        eqs = set(self.eqs)
        neqs = set(self.neqs)

        changed = True
        while changed:
            changed = False
            # equality classes share intervals; constant equalities fold away
            for pair in list(eqs):
                if len(pair) == 1:  # x = x carries nothing
                    eqs.discard(pair)
                    changed = True
                    continue
                (k1, a), (k2, b) = sorted(pair)
                if k1 == "c" and k2 == "c":
                    if a != b:
                        return BOTTOM
                    eqs.discard(pair)
                    changed = True
                    continue
                if k1 == "c":
                    met = intervals.get(b, TOP_INTERVAL).meet(Interval(a, a))
                    if met is None:
                        return BOTTOM
                    if intervals.get(b) != met:
                        intervals[b] = met
                    eqs.discard(pair)
                    changed = True
                    continue
                iv = intervals.get(a, TOP_INTERVAL).meet(intervals.get(b, TOP_INTERVAL))
                if iv is None:
                    return BOTTOM
                for var in (a, b):
                    if intervals.get(var, TOP_INTERVAL) != iv:
                        intervals[var] = iv
                        changed = True
            # disequalities: contradiction with equalities, endpoint pruning
            for pair in neqs:
                if pair in eqs:
                    return BOTTOM
                terms = sorted(pair)
                if len(terms) == 1:  # x ≠ x
                    return BOTTOM
                (k1, a), (k2, b) = terms
                if k1 == "c" and k2 == "c":
                    if a == b:
                        return BOTTOM
                    continue
                if k1 == "c":
                    iv = intervals.get(b, TOP_INTERVAL)
                    pruned = _prune(iv, a)
                    if pruned is None:
                        return BOTTOM
                    if pruned != iv:
                        intervals[b] = pruned
                        changed = True
                    continue
                iv_a = intervals.get(a, TOP_INTERVAL)
                iv_b = intervals.get(b, TOP_INTERVAL)
                if iv_a.is_singleton() and iv_b.is_singleton() and iv_a == iv_b:
                    return BOTTOM
                if iv_a.is_singleton():
                    pruned = _prune(iv_b, iv_a.lo)
                    if pruned is None:
                        return BOTTOM
                    if pruned != iv_b:
                        intervals[b] = pruned
                        changed = True
                if iv_b.is_singleton():
                    pruned = _prune(iv_a, iv_b.lo)
                    if pruned is None:
                        return BOTTOM
                    if pruned != iv_a:
                        intervals[a] = pruned
                        changed = True
        return self.replace(intervals, frozenset(eqs), frozenset(neqs))

    # -- lattice operations ----------------------------------------------------

    def is_bottom(self) -> bool:
        return self.bottom

    def leq(self, other: "AbstractValue") -> bool:
        if self.bottom:
            return True
        if other.bottom:
            return False
        mine = self._interval_map()
        for var, iv in other.intervals:
            if not mine.get(var, TOP_INTERVAL).leq(iv):
                return False
        if not other.eqs <= self._eq_closure():
            return False
        return all(self._implies_neq(pair) for pair in other.neqs)

    def _eq_closure(self) -> frozenset:
        # transitive closure of the equality relation over appearing terms
        parents: dict = {}

        def find(x):
            while parents.get(x, x) != x:
                parents[x] = parents.get(parents[x], parents[x])
                x = parents[x]
            return x

        for pair in self.eqs:
            items = sorted(pair)
            if len(items) == 2:
                ra, rb = find(items[0]), find(items[1])
                if ra != rb:
                    parents[ra] = rb
        groups: dict = {}
        for pair in self.eqs:
            for term in pair:
                groups.setdefault(find(term), set()).add(term)
        # constant-valued variables join the class of their constant
        for var, iv in self.intervals:
            if iv.is_singleton():
                term_v, term_c = ("v", var), ("c", iv.lo)
                ra, rb = find(term_v), find(term_c)
                if ra != rb:
                    parents[ra] = rb
                groups.setdefault(find(term_v), set()).update({term_v, term_c})
        closure = set()
        for members in groups.values():
            members = sorted(members)
            for i, a in enumerate(members):
                for b in members[i + 1 :]:
                    closure.add(frozenset({a, b}))
        return frozenset(closure)

    def _implies_neq(self, pair: frozenset) -> bool:
        if pair in self.neqs:
            return True
        terms = sorted(pair)
        if len(terms) < 2:
            return False
        ivs = []
        for kind, value in terms:
            ivs.append(Interval(value, value) if kind == "c" else self.interval_of(value))
        return ivs[0].meet(ivs[1]) is None

    def join(self, other: "AbstractValue") -> "AbstractValue":
        if self.bottom:
            return other
        if other.bottom:
            return self
        mine, theirs = self._interval_map(), other._interval_map()
        intervals = {
            var: mine.get(var, TOP_INTERVAL).join(theirs.get(var, TOP_INTERVAL))
            for var in set(mine) | set(theirs)
        }
        eqs = self._eq_closure() & other._eq_closure()
        neqs = frozenset(
            p for p in self.neqs | other.neqs
            if self._implies_neq(p) and other._implies_neq(p)
        )
        return self.replace(intervals, _drop_constant_eqs(eqs), neqs).reduce()

    def meet(self, other: "AbstractValue") -> "AbstractValue":
        if self.bottom or other.bottom:
            return BOTTOM
        mine, theirs = self._interval_map(), other._interval_map()
        intervals = {}
        for var in set(mine) | set(theirs):
            met = mine.get(var, TOP_INTERVAL).meet(theirs.get(var, TOP_INTERVAL))
            if met is None:
                return BOTTOM
            intervals[var] = met
        return self.replace(
            intervals, self.eqs | other.eqs, self.neqs | other.neqs
        ).reduce()

    def widen(self, other: "AbstractValue") -> "AbstractValue":
        if self.bottom:
            return other
        if other.bottom:
            return self
        mine, theirs = self._interval_map(), other._interval_map()
        intervals = {
            var: mine[var].widen(theirs.get(var, TOP_INTERVAL))
            for var in mine
        }
        eqs = self._eq_closure() & other._eq_closure()
        neqs = frozenset(
            p for p in self.neqs if p in other.neqs or other._implies_neq(p)
        )
        return self.replace(intervals, _drop_constant_eqs(eqs), neqs).reduce()

    # -- transfer functions -----------------------------------------------------

    def forget(self, var: str) -> "AbstractValue":
        if self.bottom:
            return BOTTOM
        term = ("v", var)
        intervals = {v: iv for v, iv in self.intervals if v != var}
        eqs = frozenset(p for p in self.eqs if term not in p)
        neqs = frozenset(p for p in self.neqs if term not in p)
        return self.replace(intervals, eqs, neqs)

    def eval_interval(self, expr: IntExpr) -> Interval:
        if self.bottom:
            return TOP_INTERVAL
        if isinstance(expr, IntLit):
            return Interval(expr.value, expr.value)
        if isinstance(expr, Var):
            return self.interval_of(expr.name)
        if isinstance(expr, BinOp):
            left = self.eval_interval(expr.left)
            right = self.eval_interval(expr.right)
            if expr.op == "+":
                return left.add(right)
            if expr.op == "-":
                return left.sub(right)
            if expr.op == "*":
                return left.mul(right)
            return left.div(right)
        if isinstance(expr, Ternary):
            outcome = self.decide(expr.cond)
            if outcome is True:
                return self.eval_interval(expr.then)
            if outcome is False:
                return self.eval_interval(expr.orelse)
            return self.eval_interval(expr.then).join(self.eval_interval(expr.orelse))
        raise TypeError(expr)

    def decide(self, cond: BoolExpr) -> Optional[bool]:
        """Definite truth value of a condition, or None when undecided."""
        if self.constrain(cond, True).is_bottom():
            return False
        if self.constrain(cond, False).is_bottom():
            return True
        return None

    def assign(self, var: str, expr: IntExpr) -> "AbstractValue":
        if self.bottom:
            return BOTTOM
        iv = self.eval_interval(expr)
        neqs_extra = []
        # relational refinement: a difference of equal variables is zero, a
        # difference of unequal ones is not, a product of nonzeros is not
        if isinstance(expr, BinOp) and isinstance(expr.left, (Var, IntLit)) and isinstance(expr.right, (Var, IntLit)):
            lt = expr.left.name if isinstance(expr.left, Var) else expr.left.value
            rt = expr.right.name if isinstance(expr.right, Var) else expr.right.value
            if expr.op == "-":
                if self._terms_equal(lt, rt):
                    met = iv.meet(Interval(0, 0))
                    if met is None:
                        return BOTTOM
                    iv = met
                elif self._terms_unequal(lt, rt):
                    neqs_extra.append(_pair(var, 0))
            elif expr.op == "*":
                if self._term_nonzero(lt) and self._term_nonzero(rt):
                    neqs_extra.append(_pair(var, 0))
        base = self.forget(var)
        intervals = base._interval_map()
        if not iv.is_top():
            intervals[var] = iv
        eqs = base.eqs
        if isinstance(expr, Var) and expr.name != var:
            eqs = eqs | {_pair(var, expr.name)}
        neqs = base.neqs | frozenset(neqs_extra)
        return base.replace(intervals, eqs, neqs).reduce()

    def _terms_equal(self, a: Term, b: Term) -> bool:
        if a == b:
            return True
        return _pair(a, b) in self._eq_closure()

    def _terms_unequal(self, a: Term, b: Term) -> bool:
        return self._implies_neq(_pair(a, b))

    def _term_nonzero(self, t: Term) -> bool:
        if isinstance(t, int):
            return t != 0
        return self._implies_neq(_pair(t, 0))

    def assign_input(self, var: str, domain: tuple[int, ...]) -> "AbstractValue":
        if self.bottom:
            return BOTTOM
        base = self.forget(var)
        intervals = base._interval_map()
        intervals[var] = Interval(min(domain), max(domain))
        return base.replace(intervals, base.eqs, base.neqs).reduce()

    def constrain(self, cond: BoolExpr, outcome: bool) -> "AbstractValue":
        """Meet with an over-approximation of the condition outcome; the
        disjunctive variant below keeps or-branches separate."""
        cells = self.constrain_cells(cond, outcome)
        if not cells:
            return BOTTOM
        result = cells[0]
        for cell in cells[1:]:
            result = result.join(cell)
        return result

    def constrain_cells(self, cond: BoolExpr, outcome: bool) -> list["AbstractValue"]:
        if self.bottom:
            return []
        if isinstance(cond, Not):
            return self.constrain_cells(cond.operand, not outcome)
        if isinstance(cond, And):
            if outcome:
                out = []
                for left in self.constrain_cells(cond.left, True):
                    out.extend(left.constrain_cells(cond.right, True))
                return out
            # ¬(p ∧ q) = ¬p ∨ (p ∧ ¬q), kept disjoint for cell splitting
            cells = self.constrain_cells(cond.left, False)
            for left in self.constrain_cells(cond.left, True):
                cells.extend(left.constrain_cells(cond.right, False))
            return cells
        if isinstance(cond, Or):
            return self.constrain_cells(
                Not(And(Not(cond.left), Not(cond.right))), outcome
            )
        assert isinstance(cond, Compare)
        op = cond.op if outcome else _NEGATE[cond.op]
        cell = self._constrain_compare(op, cond.left, cond.right)
        return [] if cell.is_bottom() else [cell]

    def _constrain_compare(self, op: str, left: IntExpr, right: IntExpr) -> "AbstractValue":
        # var-var and var-const comparisons constrain; anything else is kept
        # only as an interval test on the evaluated sides
        if isinstance(right, (Var, IntLit)) and not isinstance(left, (Var, IntLit)):
            return self._constrain_compare(_FLIP[op], right, left)
        if not isinstance(left, (Var, IntLit)):
            return self._constrain_opaque(op, left, right)
        lt: Term = left.name if isinstance(left, Var) else left.value
        if isinstance(right, (Var, IntLit)):
            rt: Term = right.name if isinstance(right, Var) else right.value
            return self._constrain_terms(op, lt, rt)
        return self._constrain_opaque(op, left, right)

    def _constrain_opaque(self, op: str, left: IntExpr, right: IntExpr) -> "AbstractValue":
        left_iv = self.eval_interval(left)
        right_iv = self.eval_interval(right)
        feasible = {
            "==": lambda: left_iv.meet(right_iv) is not None,
            "!=": lambda: not (
                left_iv.is_singleton() and right_iv.is_singleton()
                and left_iv == right_iv
            ),
            "<": lambda: left_iv.lo is None or right_iv.hi is None
            or left_iv.lo < right_iv.hi,
            "<=": lambda: left_iv.lo is None or right_iv.hi is None
            or left_iv.lo <= right_iv.hi,
            ">": lambda: left_iv.hi is None or right_iv.lo is None
            or left_iv.hi > right_iv.lo,
            ">=": lambda: left_iv.hi is None or right_iv.lo is None
            or left_iv.hi >= right_iv.lo,
        }[op]()
        return self if feasible else BOTTOM

    def _constrain_terms(self, op: str, left: Term, right: Term) -> "AbstractValue":
        if left == right:
            return self if op in ("==", "<=", ">=") else BOTTOM
        intervals = self._interval_map()

        def iv_of(t: Term) -> Interval:
            return Interval(t, t) if isinstance(t, int) else intervals.get(t, TOP_INTERVAL)

        eqs, neqs = set(self.eqs), set(self.neqs)
        left_iv, right_iv = iv_of(left), iv_of(right)
        if op == "==":
            if isinstance(left, int) and isinstance(right, int):
                return self if left == right else BOTTOM
            eqs.add(_pair(left, right))
            met = left_iv.meet(right_iv)
            if met is None:
                return BOTTOM
            for t in (left, right):
                if isinstance(t, str):
                    intervals[t] = met
        elif op == "!=":
            if isinstance(left, int) and isinstance(right, int):
                return self if left != right else BOTTOM
            neqs.add(_pair(left, right))
        else:
            strict = op in ("<", ">")
            if op in (">", ">="):
                left, right = right, left
                left_iv, right_iv = right_iv, left_iv
            # now left ⋖ right
            hi_bound = right_iv.hi if right_iv.hi is None else right_iv.hi - (1 if strict else 0)
            lo_bound = left_iv.lo if left_iv.lo is None else left_iv.lo + (1 if strict else 0)
            if isinstance(left, str):
                met = intervals.get(left, TOP_INTERVAL).meet(Interval(None, hi_bound))
                if met is None:
                    return BOTTOM
                intervals[left] = met
            if isinstance(right, str):
                met = intervals.get(right, TOP_INTERVAL).meet(Interval(lo_bound, None))
                if met is None:
                    return BOTTOM
                intervals[right] = met
            if strict and isinstance(left, str) and isinstance(right, str):
                neqs.add(_pair(left, right))
            if strict and isinstance(left, int) != isinstance(right, int):
                neqs.add(_pair(left, right))
        return self.replace(intervals, frozenset(eqs), frozenset(neqs)).reduce()

    # -- concrete checks ---------------------------------------------------------

    def satisfied_by(self, env: dict[str, int]) -> bool:
        if self.bottom:
            return False
        for var, iv in self.intervals:
            if var in env and not iv.contains(env[var]):
                return False
            if var not in env and not iv.is_top():
                return False

        def value(term) -> Optional[int]:
            kind, payload = term
            if kind == "c":
                return payload
            return env.get(payload)

        for pair in self.eqs:
            terms = sorted(pair)
            if len(terms) == 2:
                a, b = value(terms[0]), value(terms[1])
                if a is None or b is None or a != b:
                    return False
        for pair in self.neqs:
            terms = sorted(pair)
            if len(terms) == 2:
                a, b = value(terms[0]), value(terms[1])
                if a is not None and b is not None and a == b:
                    return False
        return True

    # -- display -------------------------------------------------------------------

    def render(self) -> str:
        if self.bottom:
            return "⊥"
        parts = []
        for var, iv in self.intervals:
            parts.append(f"{var}={iv.lo}" if iv.is_singleton() else f"{var}∈{iv.render()}")
        for symbol, pairs in (("=", self.eqs), ("≠", self.neqs)):
            for pair in sorted(pairs, key=sorted):
                terms = sorted(pair, key=lambda t: (t[0] != "v", str(t[1])))
                if len(terms) == 2:
                    parts.append(f"{terms[0][1]}{symbol}{terms[1][1]}")
        return ", ".join(parts) if parts else "⊤"

    def __repr__(self) -> str:
        return f"AbstractValue({self.render()})"


def _prune(iv: Interval, value: int) -> Optional[Interval]:
    """Remove a value from an interval when it sits at an endpoint."""
    if iv.is_singleton() and iv.lo == value:
        return None
    if iv.lo is not None and iv.lo == value:
        return Interval(iv.lo + 1, iv.hi)
    if iv.hi is not None and iv.hi == value:
        return Interval(iv.lo, iv.hi - 1)
    return iv


def _drop_constant_eqs(eqs: frozenset) -> frozenset:
    # closure may pair constants with constants; those carry no information
    return frozenset(
        p for p in eqs if sorted(p)[0][0] == "v" or sorted(p)[1][0] == "v"
    )


TOP = AbstractValue()
BOTTOM = AbstractValue(bottom=True)


def backward_assign(var: str, expr: IntExpr, post: AbstractValue) -> list[AbstractValue]:
    """Over-approximate pre-states of an assignment given a post-state.

    Returns disjuncts: multiplication by zero genuinely splits (either
    factor may be the zero).  The assigned variable's constraints are
    consumed; whatever they imply about the operands is re-expressed with
    equalities/disequalities and interval arithmetic.
    """
    if post.is_bottom():
        return []
    target = post.interval_of(var)
    pre = post.forget(var)
    if target.is_top():
        return [pre]

    if isinstance(expr, IntLit):
        return [pre] if target.contains(expr.value) else []
    if isinstance(expr, Var):
        copied = pre._interval_map()
        met = copied.get(expr.name, TOP_INTERVAL).meet(target)
        if met is None:
            return []
        copied[expr.name] = met
        out = pre.replace(copied, pre.eqs, pre.neqs).reduce()
        return [] if out.is_bottom() else [out]
    if isinstance(expr, BinOp) and isinstance(expr.left, (Var, IntLit)) and isinstance(expr.right, (Var, IntLit)):
        zero_free = not target.contains(0) or _pair(var, 0) in post.neqs
        return _backward_binop(expr, target, pre, zero_free)
    return [pre]


def _backward_binop(
    expr: BinOp, target: Interval, pre: AbstractValue, zero_free: bool
) -> list[AbstractValue]:
    left, right = expr.left, expr.right

    def term(e) -> Term:
        return e.name if isinstance(e, Var) else e.value

    lt, rt = term(left), term(right)
    if lt == rt:
        # y - y is always 0, y * y never distinguishes factors
        if expr.op == "-" and not target.contains(0):
            return []
        return [pre]

    if expr.op == "-":
        out = pre
        # interval back-propagation: l ∈ target + r, r ∈ l − target
        l_iv = pre.eval_interval(left).meet(target.add(pre.eval_interval(right)))
        r_iv = pre.eval_interval(right).meet(pre.eval_interval(left).sub(target))
        if l_iv is None or r_iv is None:
            return []
        intervals = out._interval_map()
        if isinstance(left, Var):
            intervals[lt] = l_iv
        if isinstance(right, Var):
            intervals[rt] = r_iv
        eqs, neqs = set(out.eqs), set(out.neqs)
        if target.is_singleton() and target.lo == 0:
            eqs.add(_pair(lt, rt))
        elif zero_free:
            neqs.add(_pair(lt, rt))
        result = out.replace(intervals, frozenset(eqs), frozenset(neqs)).reduce()
        return [] if result.is_bottom() else [result]

    if expr.op == "+":
        l_iv = pre.eval_interval(left).meet(target.sub(pre.eval_interval(right)))
        r_iv = pre.eval_interval(right).meet(target.sub(pre.eval_interval(left)))
        if l_iv is None or r_iv is None:
            return []
        intervals = pre._interval_map()
        if isinstance(left, Var):
            intervals[lt] = l_iv
        if isinstance(right, Var):
            intervals[rt] = r_iv
        result = pre.replace(intervals, pre.eqs, pre.neqs).reduce()
        return [] if result.is_bottom() else [result]

    if expr.op == "*":
        if target.is_singleton() and target.lo == 0:
            # sequential exclusion keeps the disjuncts disjoint:
            # left = 0, or left ≠ 0 and right = 0
            cells = []
            first = pre._constrain_terms("==", lt, 0)
            if not first.is_bottom():
                cells.append(first)
            second = pre._constrain_terms("!=", lt, 0)
            if not second.is_bottom():
                second = second._constrain_terms("==", rt, 0)
                if not second.is_bottom():
                    cells.append(second)
            return cells
        if zero_free:
            out = pre
            for side in (left, right):
                if isinstance(side, Var):
                    out = out._constrain_terms("!=", side.name, 0)
                elif side.value == 0:
                    return []
                if out.is_bottom():
                    return []
            return [out]
        return [pre]

    return [pre]  # division: no useful backward refinement in this domain
