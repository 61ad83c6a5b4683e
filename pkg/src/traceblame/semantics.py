"""Exhaustive execution: the set of all complete event traces of a program.

Every input statement branches the enumeration over the declared finite
domain, every boolean test emits an event for the taken outcome, and every
assignment emits an event carrying the computed value.  A division by zero
emits a designated error event and the trace is complete at that point
(the alternative, raising, is available via ``on_div_zero="raise"``).

Infinite behavior is excluded: enumeration enforces a step bound and
reports an overrun as StepBoundExceeded rather than producing unending
traces.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .events import ASSIGN, EMPTY, ERROR, INPUT, TEST_FALSE, TEST_TRUE, Event, Trace, prefixes
from .language import (
    Assign,
    BinOp,
    If,
    InputAssign,
    IntLit,
    Program,
    Stmt,
    Var,
    While,
    eval_bool,
    eval_int,
    render_bool,
    render_int,
)

DEFAULT_STEP_BOUND = 10_000


class StepBoundExceeded(Exception):
    """An execution exceeded the step bound; treated as non-termination."""


class EvaluationError(Exception):
    """Runtime evaluation failure (division by zero in raising mode)."""


def assign_event(point: str, var: str, value: int) -> Event:
    return Event(point, ASSIGN, f"{var}={value}", var=var, value=value)


def input_event(point: str, var: str, source: str, value: int) -> Event:
    return Event(point, INPUT, f"{var}={value}", var=var, source=source, value=value)


def test_event(point: str, cond_text: str, outcome: bool) -> Event:
    if outcome:
        return Event(point, TEST_TRUE, cond_text)
    return Event(point, TEST_FALSE, f"¬({cond_text})")


def error_event(point: str, var: str, numerator: int) -> Event:
    # division by zero renders with the evaluated numerator, e.g. "H=1/0"
    return Event(point, ERROR, f"{var}={numerator}/0", var=var)


@dataclass
class MaximalSemantics:
    """All complete traces of a program, with derived prefix structure.

    ``traces`` is sorted by rendered events for deterministic output.
    Derived views are cached: the set of valid prefixes, the one-event
    successor map, and for each valid prefix the complete traces it can
    still become.
    """

    program: Program
    traces: tuple[Trace, ...]
    _prefixes: frozenset | None = field(default=None, repr=False)
    _completions: dict | None = field(default=None, repr=False)
    _successors: dict | None = field(default=None, repr=False)

    @property
    def trace_set(self) -> frozenset:
        return frozenset(self.traces)

    @property
    def valid_prefixes(self) -> frozenset:
        if self._prefixes is None:
            self._prefixes = prefixes(self.traces)
        return self._prefixes

    def is_valid(self, trace: Trace) -> bool:
        return trace in self.valid_prefixes

    def is_maximal(self, trace: Trace) -> bool:
        return trace in self.trace_set

    def completions(self, prefix: Trace) -> frozenset:
        """Complete traces that extend the given valid prefix."""
        if self._completions is None:
            table: dict[Trace, set[Trace]] = {}
            for t in self.traces:
                for i in range(len(t) + 1):
                    table.setdefault(t[:i], set()).add(t)
            self._completions = {k: frozenset(v) for k, v in table.items()}
        return self._completions.get(prefix, frozenset())

    def successor_events(self, prefix: Trace) -> tuple[Event, ...]:
        """Events e such that prefix·e is still a valid prefix."""
        if self._successors is None:
            table: dict[Trace, dict[Event, None]] = {}
            for t in self.traces:
                for i in range(len(t)):
                    table.setdefault(t[:i], {}).setdefault(t[i])
            self._successors = {k: tuple(v) for k, v in table.items()}
        return self._successors.get(prefix, ())


def is_valid(trace: Trace, semantics: MaximalSemantics) -> bool:
    return semantics.is_valid(trace)


@dataclass
class _Frame:
    stmts: tuple[Stmt, ...]
    index: int


def enumerate_semantics(
    program: Program,
    step_bound: int = DEFAULT_STEP_BOUND,
    on_div_zero: str = "error_event",
) -> MaximalSemantics:
    """Execute the program on every input combination.

    Enumeration is depth-first with explicit frames; each input fans out
    one branch per domain value.  The empty program yields {ε}.
    """
    if on_div_zero not in ("error_event", "raise"):
        raise ValueError(f"bad on_div_zero mode: {on_div_zero!r}")
    domains = program.domains
    results: list[Trace] = []

    # each pending state: (env, frame stack, events so far)
    stack: list[tuple[dict[str, int], list[_Frame], list[Event]]] = [
        ({}, [_Frame(program.body, 0)], [])
    ]
    while stack:
        env, frames, events = stack.pop()
        completed = False
        while frames:
            if len(events) > step_bound:
                raise StepBoundExceeded(
                    f"execution exceeded {step_bound} events; suspected non-termination"
                )
            frame = frames[-1]
            if frame.index >= len(frame.stmts):
                frames.pop()
                continue
            stmt = frame.stmts[frame.index]
            frame.index += 1
            if isinstance(stmt, InputAssign):
                domain = domains[stmt.source]
                # branch on every value but the first; continue with the first
                for value in domain[1:]:
                    branch_env = dict(env)
                    branch_env[stmt.var] = value
                    branch_frames = [_Frame(f.stmts, f.index) for f in frames]
                    branch_events = events + [
                        input_event(stmt.point, stmt.var, stmt.source, value)
                    ]
                    stack.append((branch_env, branch_frames, branch_events))
                env[stmt.var] = domain[0]
                events.append(input_event(stmt.point, stmt.var, stmt.source, domain[0]))
            elif isinstance(stmt, Assign):
                try:
                    value = eval_int(stmt.expr, env)
                except ZeroDivisionError as exc:
                    if on_div_zero == "raise":
                        raise EvaluationError(
                            f"division by zero at {stmt.point}"
                        ) from exc
                    events.append(error_event(stmt.point, stmt.var, exc.args[0]))
                    results.append(Trace(tuple(events)))
                    completed = True
                    break
                env[stmt.var] = value
                events.append(assign_event(stmt.point, stmt.var, value))
            elif isinstance(stmt, If):
                outcome = eval_bool(stmt.cond, env)
                events.append(test_event(stmt.point, render_bool(stmt.cond), outcome))
                branch = stmt.then if outcome else stmt.orelse
                if branch:
                    frames.append(_Frame(branch, 0))
            elif isinstance(stmt, While):
                outcome = eval_bool(stmt.cond, env)
                events.append(test_event(stmt.point, render_bool(stmt.cond), outcome))
                if outcome:
                    frame.index -= 1  # re-test after the body
                    frames.append(_Frame(stmt.body, 0))
            else:
                raise TypeError(stmt)
        if not completed:
            results.append(Trace(tuple(events)))

    results.sort(key=lambda t: t.texts())
    return MaximalSemantics(program=program, traces=tuple(results))


def replay_states(program: Program, trace: Trace) -> list[tuple[str, dict[str, int]]]:
    """Environments along a trace: (point, env before the event), plus exit.

    Test events leave the environment unchanged; error events record the
    attempted variable as undefined-after, matching the interpreter.
    """
    env: dict[str, int] = {}
    out: list[tuple[str, dict[str, int]]] = []
    for event in trace:
        out.append((event.point, dict(env)))
        if event.kind in (ASSIGN, INPUT):
            env[event.var] = event.value
    out.append((program.exit_point, dict(env)))
    return out


def final_env(trace: Trace) -> dict[str, int]:
    env: dict[str, int] = {}
    for event in trace:
        if event.kind in (ASSIGN, INPUT):
            env[event.var] = event.value
    return env
