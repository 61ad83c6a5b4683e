"""What an observer can conclude from a partial run.

Three layers:

* inquiry: the strongest behavior in the lattice that a prefix already
  guarantees (⊥ for invalid traces);
* cognizance: the set of valid prefixes an observer cannot tell apart
  from a given one.  An observer is described by the input sources hidden
  from it; an event is invisible when it is an input of a hidden source,
  or a test/assignment whose condition or right-hand side depends on a
  hidden source (transitively, through data or control, by syntactic
  variable-level taint).  Indistinguishable prefixes are those with the
  same visible event sequence, taken at the last visible event so that the
  set is minimal; the inquired prefix itself is always a member;
* observation: the join of inquiries over the cognizance set.

The omniscient observer (nothing hidden) observes exactly the inquiry.
Taint is flow-insensitive and over-approximates hiddenness, which only
enlarges cognizance sets and weakens observations — the conservative
direction for an observer's knowledge.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

from .events import ASSIGN, ERROR, INPUT, EMPTY, Event, Trace
from .language import (
    Assign,
    If,
    InputAssign,
    Program,
    Stmt,
    While,
    bool_vars,
    int_vars,
)
from .lattice import AnalysisWarning, BehaviorLattice, MaximalProperty, UnknownName
from .semantics import MaximalSemantics


class InvalidTrace(Exception):
    """Cognizance and observation are only evaluated on valid prefixes."""


@dataclass(frozen=True)
class CognizanceSpec:
    """An observer: which declared input sources it cannot see.

    An empty hidden set is the omniscient observer, whose cognizance of
    any trace is the singleton {σ}.
    """

    observer_name: str
    hidden_sources: frozenset = frozenset()

    @property
    def omniscient(self) -> bool:
        return not self.hidden_sources


OMNISCIENT = CognizanceSpec("omniscient")


def compute_taint(program: Program, hidden_sources: frozenset) -> tuple[set, set]:
    """Variable-level syntactic taint and control-tainted program points.

    A variable is tainted if it is read from a hidden source, assigned an
    expression over tainted variables, or assigned at all under a tainted
    condition (implicit flow).  Fixpoint over both maps.
    """
    tainted_vars: set[str] = set()
    tainted_points: set[str] = set()

    def walk(stmts: tuple[Stmt, ...], control_tainted: bool) -> None:
        for s in stmts:
            if isinstance(s, InputAssign):
                if s.source in hidden_sources or control_tainted:
                    tainted_vars.add(s.var)
                if control_tainted:
                    tainted_points.add(s.point)
            elif isinstance(s, Assign):
                if control_tainted or int_vars(s.expr) & tainted_vars:
                    tainted_vars.add(s.var)
                if control_tainted:
                    tainted_points.add(s.point)
            elif isinstance(s, (If, While)):
                cond_tainted = control_tainted or bool(
                    bool_vars(s.cond) & tainted_vars
                )
                if control_tainted:
                    tainted_points.add(s.point)
                branches = (s.then, s.orelse) if isinstance(s, If) else (s.body,)
                for branch in branches:
                    walk(branch, cond_tainted)

    before = (None, None)
    while before != (len(tainted_vars), len(tainted_points)):
        before = (len(tainted_vars), len(tainted_points))
        walk(program.body, False)
    return tainted_vars, tainted_points


def hidden_control_flow(program: Program, hidden_sources: frozenset) -> bool:
    """True when some if/while condition depends on a hidden source, i.e.
    the shape of the visible event sequence may leak branching structure.
    In that case the segment-decomposition assumption behind the one-step
    observation identity is not guaranteed by this construction."""
    tainted_vars, _ = compute_taint(program, hidden_sources)
    for s in program.statements():
        if isinstance(s, (If, While)) and bool_vars(s.cond) & tainted_vars:
            return True
    return False


class ObservationEngine:
    """Memoized inquiry/cognizance/observation over one (S, L, observer).

    Safe to share read-mostly across trace-parallel analyses: all caches
    are per-prefix dictionaries.
    """

    def __init__(
        self,
        semantics: MaximalSemantics,
        lattice: BehaviorLattice,
        cognizance: CognizanceSpec = OMNISCIENT,
        warn_on_hidden_control: bool = True,
    ):
        declared = set(semantics.program.domains)
        unknown = cognizance.hidden_sources - declared
        if unknown:
            raise UnknownName(
                f"hidden sources {sorted(unknown)} are not declared inputs"
            )
        self.semantics = semantics
        self.lattice = lattice
        self.cognizance_spec = cognizance
        self._inquiry_cache: dict[Trace, MaximalProperty] = {}
        self._observation_cache: dict[Trace, MaximalProperty] = {}
        self._cognizance_cache: dict[Trace, frozenset] = {}
        self._visible_cache: dict[tuple[str, str], bool] = {}
        self._projection_index: dict[tuple, list] | None = None

        if cognizance.omniscient:
            self._tainted_vars: set[str] = set()
            self._tainted_points: set[str] = set()
        else:
            self._tainted_vars, self._tainted_points = compute_taint(
                semantics.program, cognizance.hidden_sources
            )
            if warn_on_hidden_control and hidden_control_flow(
                semantics.program, cognizance.hidden_sources
            ):
                warnings.warn(
                    f"observer {cognizance.observer_name!r}: hidden input guards "
                    "control flow; cognizance may not decompose over trace "
                    "concatenation",
                    AnalysisWarning,
                    stacklevel=3,
                )

    # -- visibility ---------------------------------------------------------

    def event_visible(self, event: Event) -> bool:
        key = (event.point, event.kind)
        cached = self._visible_cache.get(key)
        if cached is not None:
            return cached
        visible = self._event_visible(event)
        self._visible_cache[key] = visible
        return visible

    def _event_visible(self, event: Event) -> bool:
        if self.cognizance_spec.omniscient:
            return True
        if event.point in self._tainted_points:
            return False
        if event.kind == INPUT:
            return event.source not in self.cognizance_spec.hidden_sources
        stmt = self.semantics.program.statement_at(event.point)
        if event.kind in (ASSIGN, ERROR):
            assert isinstance(stmt, Assign)
            return not (int_vars(stmt.expr) & self._tainted_vars)
        # test outcome
        assert isinstance(stmt, (If, While))
        return not (bool_vars(stmt.cond) & self._tainted_vars)

    def visible_projection(self, trace: Trace) -> tuple[Event, ...]:
        return tuple(e for e in trace if self.event_visible(e))

    # -- cognizance ---------------------------------------------------------

    def cognizance(self, trace: Trace) -> frozenset:
        """Valid prefixes the observer cannot distinguish from the given one.

        Extensive: the trace itself is always a member.  Representatives
        are the prefixes whose last event is visible (or ε), which carry
        all the information the join in the observation can use.
        """
        if not self.semantics.is_valid(trace):
            raise InvalidTrace(f"not a valid prefix: {trace.render()}")
        if self.cognizance_spec.omniscient:
            return frozenset({trace})
        cached = self._cognizance_cache.get(trace)
        if cached is not None:
            return cached
        if self._projection_index is None:
            index: dict[tuple, list] = {}
            for prefix in self.semantics.valid_prefixes:
                if len(prefix) == 0 or self.event_visible(prefix[-1]):
                    index.setdefault(self.visible_projection(prefix), []).append(
                        prefix
                    )
            self._projection_index = index
        members = set(self._projection_index.get(self.visible_projection(trace), ()))
        members.add(trace)
        result = frozenset(members)
        self._cognizance_cache[trace] = result
        return result

    # -- inquiry and observation ---------------------------------------------

    def inquiry(self, trace: Trace) -> MaximalProperty:
        """Strongest lattice behavior the prefix guarantees; ⊥ if invalid."""
        cached = self._inquiry_cache.get(trace)
        if cached is not None:
            return cached
        if not self.semantics.is_valid(trace):
            result = self.lattice.bottom
        else:
            completions = self.semantics.completions(trace)
            members = self.semantics.trace_set
            for prop in self.lattice:
                if completions <= prop.members:
                    members = members & prop.members
            result = self.lattice.element_for(members)
        self._inquiry_cache[trace] = result
        return result

    def observation(self, trace: Trace) -> MaximalProperty:
        """Join of inquiries over the cognizance set."""
        cached = self._observation_cache.get(trace)
        if cached is not None:
            return cached
        if self.cognizance_spec.omniscient:
            result = self.inquiry(trace)
        else:
            members = frozenset()
            for member in self.cognizance(trace):
                members = members | self.inquiry(member).members
            result = self.lattice.element_for(members)
        self._observation_cache[trace] = result
        return result


def inquiry(
    semantics: MaximalSemantics, lattice: BehaviorLattice, trace: Trace
) -> MaximalProperty:
    return ObservationEngine(semantics, lattice).inquiry(trace)


def cognizance(
    spec: CognizanceSpec, semantics: MaximalSemantics, trace: Trace
) -> frozenset:
    # the lattice is irrelevant for cognizance; a trivial one suffices
    from .lattice import build_lattice

    engine = ObservationEngine(
        semantics, build_lattice(semantics, []), spec, warn_on_hidden_control=False
    )
    return engine.cognizance(trace)


def observation(
    semantics: MaximalSemantics,
    lattice: BehaviorLattice,
    spec: CognizanceSpec,
    trace: Trace,
) -> MaximalProperty:
    return ObservationEngine(semantics, lattice, spec).observation(trace)
