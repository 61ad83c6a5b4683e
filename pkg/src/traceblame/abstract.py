"""Sound abstract analysis: who is responsible, without enumerating runs.

The pipeline mirrors the concrete one in the abstract:

1. a forward interval/(dis)equality analysis over-approximates the states
   reachable at every program point;
2. the user's description of the erroneous runs (P̄b) and the correct runs
   (P̄¬b) at each point is strengthened by the invariants and refined by a
   backward pass that pushes terminal constraints into the program
   (``c = 0`` after ``c = a - b`` becomes ``a = b`` before it);
3. a Floyd-Hoare automaton is built from the control-flow graph, splitting
   nodes wherever the strengthened P̄b and P̄¬b disagree (never at loop
   heads, which keeps it finite) and dropping abstractly dead nodes;
4. every node is marked backwards with what its futures settle: P̄b, P̄¬b,
   both (a genuine branch point), or ⊤ when certainty is lost;
5. on every elementary path into a P̄b terminal, the transition where the
   mark changes names the action that is definitely (from a both-mark) or
   potentially (from a ⊤ mark, together with every earlier multi-choice
   action) responsible.

Definite verdicts hold on every concretization of their path; actions that
do not even show up as potential are definitely not responsible.  The
eventuality check uses exact bounded enumeration over the finite input
domains; with it disabled, branch-point marks degrade to ⊤ and verdicts to
potential-only, which is the sound direction.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .absdomain import BOTTOM, TOP, AbstractValue, backward_assign
from .language import (
    Assign,
    BoolExpr,
    If,
    InputAssign,
    Program,
    Stmt,
    While,
    render_bool,
    render_int,
)
from .semantics import MaximalSemantics, enumerate_semantics, replay_states


class EmptySpec(Exception):
    """A strengthened terminal specification is unsatisfiable everywhere."""


class IndistinguishableSpecs(Exception):
    """P̄b and P̄¬b abstract to overlapping terminal constraints."""


# marks
BOT = "BOT"
PB = "Pb"
PNOTB = "P¬b"
BOTH = "Pb/P¬b"
TOP_MARK = "⊤"


@dataclass(frozen=True)
class Action:
    """A labelled basic program action; identity is the program point plus
    the test outcome, so every edge maps back to a unique statement."""

    point: str
    kind: str  # assign | input | test
    label: str
    outcome: bool | None = None

    def __repr__(self) -> str:
        return f"Action({self.point}: {self.label})"


@dataclass(frozen=True)
class CfgEdge:
    src: str
    dst: str
    action: Action


def _action_for(stmt: Stmt, outcome: bool | None = None) -> Action:
    if isinstance(stmt, InputAssign):
        return Action(stmt.point, "input", f"{stmt.var} = {stmt.source}()")
    if isinstance(stmt, Assign):
        return Action(stmt.point, "assign", f"{stmt.var} = {render_int(stmt.expr)}")
    assert isinstance(stmt, (If, While))
    text = render_bool(stmt.cond)
    label = text if outcome else f"¬({text})"
    return Action(stmt.point, "test", label, outcome=outcome)


def build_cfg(program: Program) -> tuple[str, str, tuple[CfgEdge, ...], frozenset]:
    """Entry point, exit point, edges, and the set of loop-head points."""
    edges: list[CfgEdge] = []
    loop_heads: set[str] = set()

    def walk(stmts: tuple[Stmt, ...], follow: str) -> str:
        entry = follow
        for s in reversed(stmts):
            if isinstance(s, (Assign, InputAssign)):
                edges.append(CfgEdge(s.point, entry, _action_for(s)))
            elif isinstance(s, If):
                then_entry = walk(s.then, entry)
                else_entry = walk(s.orelse, entry)
                edges.append(CfgEdge(s.point, then_entry, _action_for(s, True)))
                edges.append(CfgEdge(s.point, else_entry, _action_for(s, False)))
            elif isinstance(s, While):
                loop_heads.add(s.point)
                body_entry = walk(s.body, s.point)
                edges.append(CfgEdge(s.point, body_entry, _action_for(s, True)))
                edges.append(CfgEdge(s.point, entry, _action_for(s, False)))
            else:
                raise TypeError(s)
            entry = s.point
        return entry

    exit_point = program.exit_point
    entry = walk(program.body, exit_point)
    return entry, exit_point, tuple(edges), frozenset(loop_heads)


def _apply_action(action: Action, state: AbstractValue, program: Program) -> AbstractValue:
    stmt = program.statement_at(action.point)
    if action.kind == "assign":
        assert isinstance(stmt, Assign)
        return state.assign(stmt.var, stmt.expr)
    if action.kind == "input":
        assert isinstance(stmt, InputAssign)
        return state.assign_input(stmt.var, program.domains[stmt.source])
    assert isinstance(stmt, (If, While))
    return state.constrain(stmt.cond, bool(action.outcome))


def _backward_action(
    action: Action, post: AbstractValue, program: Program
) -> list[AbstractValue]:
    stmt = program.statement_at(action.point)
    if action.kind == "assign":
        assert isinstance(stmt, Assign)
        return backward_assign(stmt.var, stmt.expr, post)
    if action.kind == "input":
        assert isinstance(stmt, InputAssign)
        domain = program.domains[stmt.source]
        bound = post.interval_of(stmt.var)
        if not any(bound.contains(v) for v in domain):
            return []
        return [post.forget(stmt.var)]
    assert isinstance(stmt, (If, While))
    return post.constrain_cells(stmt.cond, bool(action.outcome))


def forward_analysis(
    program: Program, unroll_k: int = 3
) -> dict[str, AbstractValue]:
    """Invariant reachable at each point (before its statement executes),
    exit point included; loops are unrolled ``unroll_k`` times before
    widening at the head."""
    entry, exit_point, edges, loop_heads = build_cfg(program)
    out_edges: dict[str, list[CfgEdge]] = {}
    for e in edges:
        out_edges.setdefault(e.src, []).append(e)
    invariants: dict[str, AbstractValue] = {
        p: BOTTOM for p in (*program.points, exit_point)
    }
    invariants[entry] = TOP
    updates: dict[str, int] = {}
    worklist = [entry]
    while worklist:
        point = worklist.pop()
        state = invariants[point]
        if state.is_bottom():
            continue
        for edge in out_edges.get(point, ()):
            post = _apply_action(edge.action, state, program)
            if post.is_bottom():
                continue
            old = invariants[edge.dst]
            new = old.join(post)
            if edge.dst in loop_heads and updates.get(edge.dst, 0) >= unroll_k:
                new = old.widen(new)
            if new != old:
                invariants[edge.dst] = new
                updates[edge.dst] = updates.get(edge.dst, 0) + 1
                worklist.append(edge.dst)
    return invariants


@dataclass
class AbstractUserSpec:
    """Per-point abstract constraints for the analyzed traces T̄, the
    erroneous runs P̄b and the correct runs P̄¬b; missing points mean no
    constraint."""

    t: dict[str, AbstractValue] = field(default_factory=dict)
    pb: dict[str, AbstractValue] = field(default_factory=dict)
    pnb: dict[str, AbstractValue] = field(default_factory=dict)

    @classmethod
    def for_exit_condition(cls, program: Program, cond: BoolExpr) -> "AbstractUserSpec":
        exit_point = program.exit_point
        return cls(
            pb={exit_point: TOP.constrain(cond, True)},
            pnb={exit_point: TOP.constrain(cond, False)},
        )


@dataclass
class StrengthenedSpecs:
    tbar: dict[str, AbstractValue]
    pb_cells: dict[str, tuple[AbstractValue, ...]]
    pnb_cells: dict[str, tuple[AbstractValue, ...]]


_MAX_CELLS = 8
_MAX_BACKWARD_PASSES = 64


def strengthen(
    program: Program,
    invariants: dict[str, AbstractValue],
    user: AbstractUserSpec,
) -> StrengthenedSpecs:
    """Meet the user specification with the invariance analysis, then push
    the terminal constraints backwards as disjunctive cells per point."""
    entry, exit_point, edges, loop_heads = build_cfg(program)
    points = (*program.points, exit_point)
    tbar = {
        p: invariants[p].meet(user.t.get(p, TOP)) for p in points
    }

    def run_backward(spec_map: dict[str, AbstractValue]) -> dict[str, tuple[AbstractValue, ...]]:
        cells: dict[str, tuple[AbstractValue, ...]] = {p: () for p in points}
        seed = tbar[exit_point].meet(spec_map.get(exit_point, TOP))
        cells[exit_point] = (seed,) if not seed.is_bottom() else ()
        in_edges: dict[str, list[CfgEdge]] = {}
        for e in edges:
            in_edges.setdefault(e.src, []).append(e)
        for _ in range(_MAX_BACKWARD_PASSES):
            changed = False
            for p in reversed(points):
                if p == exit_point:
                    continue
                collected: list[AbstractValue] = []
                for edge in in_edges.get(p, ()):
                    for post in cells[edge.dst]:
                        for pre in _backward_action(edge.action, post, program):
                            refined = pre.meet(tbar[p]).meet(spec_map.get(p, TOP))
                            if not refined.is_bottom() and refined not in collected:
                                collected.append(refined)
                if p in loop_heads or len(collected) > _MAX_CELLS:
                    merged = BOTTOM
                    for c in collected:
                        merged = merged.join(c)
                    collected = [] if merged.is_bottom() else [merged]
                new = tuple(collected)
                if new != cells[p]:
                    cells[p] = new
                    changed = True
            if not changed:
                break
        return cells

    pb_cells = run_backward(user.pb)
    pnb_cells = run_backward(user.pnb)
    if not pb_cells[exit_point] and not pnb_cells[exit_point]:
        raise EmptySpec("both terminal specifications are unsatisfiable")
    return StrengthenedSpecs(tbar=tbar, pb_cells=pb_cells, pnb_cells=pnb_cells)


@dataclass(frozen=True)
class AutomatonNode:
    point: str
    tag: str
    invariant: AbstractValue

    @property
    def name(self) -> str:
        return f"{self.point}{self.tag}"

    def __repr__(self) -> str:
        return f"Node({self.name}: {self.invariant.render()})"


@dataclass
class FloydHoareAutomaton:
    program: Program
    nodes: tuple[AutomatonNode, ...]
    edges: tuple[tuple[AutomatonNode, AutomatonNode, Action], ...]
    entry_nodes: tuple[AutomatonNode, ...]
    terminal_class: dict  # AutomatonNode -> "b" | "nb"

    def successors(self, node: AutomatonNode):
        return [(m, a) for (n, m, a) in self.edges if n == node]

    def node_named(self, name: str) -> AutomatonNode:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)


def build_automaton(
    program: Program, strengthened: StrengthenedSpecs
) -> FloydHoareAutomaton:
    """Control-flow graph with nodes split where the strengthened P̄b and
    P̄¬b cells disagree; abstractly dead nodes and nodes off every
    entry-to-terminal path are removed."""
    entry, exit_point, edges, loop_heads = build_cfg(program)
    points = (*program.points, exit_point)
    tbar = strengthened.tbar

    exit_b = strengthened.pb_cells[exit_point]
    exit_nb = strengthened.pnb_cells[exit_point]
    for b_cell in exit_b:
        for nb_cell in exit_nb:
            if not b_cell.meet(nb_cell).is_bottom():
                raise IndistinguishableSpecs(
                    "terminal specifications overlap: "
                    f"{b_cell.render()} vs {nb_cell.render()}"
                )

    nodes_at: dict[str, list[AutomatonNode]] = {}
    terminal_class: dict[AutomatonNode, str] = {}
    for p in points:
        if tbar[p].is_bottom():
            nodes_at[p] = []
            continue
        b_cells = strengthened.pb_cells[p]
        nb_cells = strengthened.pnb_cells[p]
        if p == exit_point:
            made = []
            for i, cell in enumerate(b_cells):
                node = AutomatonNode(p, _tag("b", i, len(b_cells) + len(nb_cells)), cell)
                terminal_class[node] = "b"
                made.append(node)
            for i, cell in enumerate(nb_cells):
                node = AutomatonNode(p, _tag("nb", i, len(b_cells) + len(nb_cells)), cell)
                terminal_class[node] = "nb"
                made.append(node)
            nodes_at[p] = made
            continue
        if p in loop_heads or set(b_cells) == set(nb_cells):
            nodes_at[p] = [AutomatonNode(p, "", tbar[p])]
            continue
        distinct: list[AbstractValue] = []
        for cell in (*b_cells, *nb_cells):
            if cell not in distinct:
                distinct.append(cell)
        distinct.sort(key=lambda v: v.render())
        if not distinct:
            nodes_at[p] = []
        elif len(distinct) == 1:
            nodes_at[p] = [AutomatonNode(p, "", distinct[0])]
        else:
            nodes_at[p] = [
                AutomatonNode(p, _suffix(i), v) for i, v in enumerate(distinct)
            ]

    auto_edges = []
    for edge in edges:
        for src in nodes_at.get(edge.src, ()):
            post = _apply_action(edge.action, src.invariant, program)
            if post.is_bottom():
                continue
            for dst in nodes_at.get(edge.dst, ()):
                if not post.meet(dst.invariant).is_bottom():
                    auto_edges.append((src, dst, edge.action))

    entry_nodes = tuple(nodes_at.get(entry, ()))
    automaton = FloydHoareAutomaton(
        program=program,
        nodes=tuple(n for ns in nodes_at.values() for n in ns),
        edges=tuple(auto_edges),
        entry_nodes=entry_nodes,
        terminal_class=terminal_class,
    )
    return _prune(automaton)


def _tag(prefix: str, index: int, total: int) -> str:
    return f".{prefix}" if total <= 2 else f".{prefix}{index}"


_SUFFIXES = "abcdefgh"


def _suffix(i: int) -> str:
    return f".{_SUFFIXES[i]}" if i < len(_SUFFIXES) else f".n{i}"


def _prune(automaton: FloydHoareAutomaton) -> FloydHoareAutomaton:
    forward: dict[AutomatonNode, set] = {}
    backward: dict[AutomatonNode, set] = {}
    for n, m, _ in automaton.edges:
        forward.setdefault(n, set()).add(m)
        backward.setdefault(m, set()).add(n)

    def reach(seeds, adjacency):
        seen = set(seeds)
        frontier = list(seeds)
        while frontier:
            for nxt in adjacency.get(frontier.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return seen

    reachable = reach(automaton.entry_nodes, forward)
    coreachable = reach(list(automaton.terminal_class), backward)
    keep = reachable & coreachable
    return FloydHoareAutomaton(
        program=automaton.program,
        nodes=tuple(n for n in automaton.nodes if n in keep),
        edges=tuple(e for e in automaton.edges if e[0] in keep and e[1] in keep),
        entry_nodes=tuple(n for n in automaton.entry_nodes if n in keep),
        terminal_class={
            n: c for n, c in automaton.terminal_class.items() if n in keep
        },
    )


class EventualityOracle:
    """Certifies that terminal classes are definitely reachable from a node.

    ``exact`` mode replays the finite enumeration: it answers from the
    concrete states observed at each point.  ``disabled`` mode has no
    eventuality information: single-class propagation is still justified
    by the termination assumption, but branch-point confirmation fails,
    degrading those marks to ⊤.
    """

    def __init__(self, mode: str = "exact"):
        if mode not in ("exact", "disabled"):
            raise ValueError(f"unknown oracle mode {mode!r}")
        self.mode = mode
        self._states: dict[str, list[tuple[dict, frozenset]]] = {}

    @classmethod
    def exact(
        cls,
        program: Program,
        user: AbstractUserSpec,
        semantics: MaximalSemantics | None = None,
    ) -> "EventualityOracle":
        oracle = cls("exact")
        if semantics is None:
            semantics = enumerate_semantics(program)
        exit_point = program.exit_point
        pb = user.pb.get(exit_point, TOP)
        pnb = user.pnb.get(exit_point, TOP)
        # aggregate over traces: a state reaches every terminal class that
        # some run passing through it reaches
        aggregated: dict[tuple[str, frozenset], set] = {}
        for trace in semantics.traces:
            env = dict(_final_env_of(trace))
            classes = set()
            if pb.satisfied_by(env):
                classes.add("b")
            if pnb.satisfied_by(env):
                classes.add("nb")
            for point, state in replay_states(program, trace):
                key = (point, frozenset(state.items()))
                aggregated.setdefault(key, set()).update(classes)
        for (point, state_items), classes in aggregated.items():
            oracle._states.setdefault(point, []).append(
                (dict(state_items), frozenset(classes))
            )
        return oracle

    @classmethod
    def disabled(cls) -> "EventualityOracle":
        return cls("disabled")

    def confirms(self, node: AutomatonNode, targets: frozenset) -> bool:
        """True when one reachable concrete state satisfying the node's
        invariant can be continued into a terminal of every target class."""
        if self.mode == "disabled":
            return len(targets) == 1
        for env, classes in self._states.get(node.point, ()):
            if targets <= classes and node.invariant.satisfied_by(env):
                return True
        return False

    def definitely_reaches(self, node: AutomatonNode, target: str) -> Optional[bool]:
        if self.mode == "disabled":
            return None
        return self.confirms(node, frozenset({target}))


def _final_env_of(trace) -> dict:
    env: dict = {}
    for e in trace:
        if e.kind in ("assign", "input"):
            env[e.var] = e.value
    return env


_CLASS_SETS = {PB: frozenset({"b"}), PNOTB: frozenset({"nb"}),
               BOTH: frozenset({"b", "nb"}), TOP_MARK: None, BOT: frozenset()}


def abstract_observation(
    automaton: FloydHoareAutomaton, oracle: EventualityOracle
) -> dict:
    """Backward fixpoint marking every node with the terminal classes its
    futures definitely settle; rerunning it is a no-op."""
    marks: dict[AutomatonNode, str] = {}
    for node in automaton.nodes:
        if node in automaton.terminal_class:
            marks[node] = PB if automaton.terminal_class[node] == "b" else PNOTB
        else:
            marks[node] = BOT
    changed = True
    while changed:
        changed = False
        for node in automaton.nodes:
            if node in automaton.terminal_class:
                continue
            successor_marks = {marks[m] for m, _ in automaton.successors(node)}
            if not successor_marks or BOT in successor_marks:
                continue  # not yet determined
            new = _combine(node, successor_marks, oracle)
            if new != marks[node]:
                marks[node] = new
                changed = True
    for node in automaton.nodes:
        if marks[node] == BOT:
            marks[node] = TOP_MARK  # unresolved cycles lose certainty
    return marks


def _combine(node: AutomatonNode, successor_marks: set, oracle: EventualityOracle) -> str:
    classes: set = set()
    for mark in successor_marks:
        cs = _CLASS_SETS[mark]
        if cs is None:
            return TOP_MARK
        classes |= cs
    if classes == {"b"}:
        return PB if oracle.confirms(node, frozenset({"b"})) else TOP_MARK
    if classes == {"nb"}:
        return PNOTB if oracle.confirms(node, frozenset({"nb"})) else TOP_MARK
    if oracle.confirms(node, frozenset({"b", "nb"})):
        return BOTH
    return TOP_MARK


@dataclass
class AbstractVerdicts:
    """Per elementary path: the definitely responsible action, or the
    potentially responsible action set."""

    definite: tuple = ()  # (path node names, Action)
    potential: tuple = ()  # (path node names, tuple[Action, ...])

    @property
    def definite_actions(self) -> frozenset:
        return frozenset(a for _, a in self.definite)

    @property
    def potential_actions(self) -> frozenset:
        return frozenset(a for _, actions in self.potential for a in actions)

    @property
    def all_actions(self) -> frozenset:
        return self.definite_actions | self.potential_actions


def abstract_responsibility(
    automaton: FloydHoareAutomaton,
    marks: dict,
    behavior_class: str = "b",
) -> AbstractVerdicts:
    """Scan every elementary entry-to-terminal path of the behavior class.

    The first transition from a both-marked node into a target-marked node
    names a definitely responsible action; failing that, the transition
    from ⊤ into the target mark names a potentially responsible action
    together with every earlier action on the path that offers a concrete
    choice (inputs with more than one value)."""
    target_mark = PB if behavior_class == "b" else PNOTB
    definite = []
    potential = []

    def multi_choice(action: Action) -> bool:
        if action.kind != "input":
            return False
        stmt = automaton.program.statement_at(action.point)
        return len(automaton.program.domains[stmt.source]) > 1

    def scan(path_nodes, path_actions):
        names = tuple(n.name for n in path_nodes)
        for i, action in enumerate(path_actions):
            if marks[path_nodes[i]] == BOTH and marks[path_nodes[i + 1]] == target_mark:
                definite.append((names, action))
                return
        for i in reversed(range(len(path_actions))):
            if marks[path_nodes[i]] == TOP_MARK and marks[path_nodes[i + 1]] == target_mark:
                before = tuple(a for a in path_actions[:i] if multi_choice(a))
                potential.append((names, (path_actions[i],) + before))
                return
        # every node already settled on the behavior: no action responsible

    def dfs(node, path_nodes, path_actions):
        if node in automaton.terminal_class:
            if automaton.terminal_class[node] == behavior_class:
                scan(path_nodes, path_actions)
            return
        for succ, action in automaton.successors(node):
            if succ in path_nodes:
                continue  # elementary paths only; back edges are summarized
            dfs(succ, path_nodes + [succ], path_actions + [action])

    for entry in automaton.entry_nodes:
        dfs(entry, [entry], [])
    return AbstractVerdicts(definite=tuple(definite), potential=tuple(potential))


def analyze_abstract(
    program: Program,
    user: AbstractUserSpec,
    behavior_class: str = "b",
    oracle: EventualityOracle | None = None,
    unroll_k: int = 3,
) -> tuple[FloydHoareAutomaton, dict, AbstractVerdicts]:
    """Full abstract pipeline; returns the automaton, the marks, and the
    verdicts for the requested behavior class."""
    invariants = forward_analysis(program, unroll_k=unroll_k)
    strengthened = strengthen(program, invariants, user)
    automaton = build_automaton(program, strengthened)
    if oracle is None:
        oracle = EventualityOracle.exact(program, user)
    marks = abstract_observation(automaton, oracle)
    verdicts = abstract_responsibility(automaton, marks, behavior_class)
    return automaton, marks, verdicts
