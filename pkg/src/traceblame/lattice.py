"""Finite lattices of behaviors (sets of complete traces).

A behavior is a set of maximal traces; the lattice always contains
⊤ = S^M (holds in every valid complete run) and ⊥ = ∅ (holds in none).
Named behaviors come from trace predicates; the element set is then
closed under pairwise union and intersection, so join and meet are
always computed inside the lattice.  Closure elements get synthetic
names like ``join(RF,RO)``.

The prediction abstraction maps a behavior to the set of valid prefixes
that already guarantee it; together with its concretization (intersect
with S^M) it forms a Galois isomorphism on ℘(S^M).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .events import Trace
from .semantics import MaximalSemantics


class NotALattice(Exception):
    """The requested element family cannot be closed into a lattice."""


class EmptySemantics(Exception):
    """No maximal traces: nothing to build behaviors over."""


class UnknownName(Exception):
    """A referenced variable, source, or behavior name does not exist."""


class AnalysisWarning(UserWarning):
    """Non-fatal analysis diagnostics (trivial lattice, indistinguishability)."""


MAX_CLOSURE_ELEMENTS = 4096


@dataclass(frozen=True)
class MaximalProperty:
    """A named behavior: a set of maximal traces of the bound program."""

    name: str
    members: frozenset

    def __contains__(self, trace: Trace) -> bool:
        return trace in self.members

    def __repr__(self) -> str:
        return f"MaximalProperty({self.name}, {len(self.members)} traces)"


@dataclass(frozen=True)
class PredictionProperty:
    """Prefixes that guarantee a behavior; a superset of the behavior itself
    and not necessarily prefix-closed."""

    member_prefixes: frozenset
    source: MaximalProperty


@dataclass
class BehaviorLattice:
    """⟨elements, ⊑, ⊤, ⊥, ⊔, ⊓⟩ with ⊑ as set inclusion on member sets."""

    semantics: MaximalSemantics
    elements: tuple[MaximalProperty, ...]
    aliases: dict = field(default_factory=dict)  # extra name -> member set
    _by_members: dict = field(default=None, repr=False)  # type: ignore[assignment]
    _by_name: dict = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self._by_members = {p.members: p for p in self.elements}
        self._by_name = {p.name: p for p in self.elements}
        for name, members in self.aliases.items():
            self._by_name.setdefault(name, self._by_members[members])

    @property
    def top(self) -> MaximalProperty:
        return self._by_members[self.semantics.trace_set]

    @property
    def bottom(self) -> MaximalProperty:
        return self._by_members[frozenset()]

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def by_name(self, name: str) -> MaximalProperty:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownName(f"behavior {name!r} is not in the lattice") from None

    def element_for(self, members: frozenset) -> MaximalProperty:
        try:
            return self._by_members[members]
        except KeyError:
            raise NotALattice(
                f"set of {len(members)} traces is not a lattice element"
            ) from None

    def leq(self, a: MaximalProperty, b: MaximalProperty) -> bool:
        return a.members <= b.members

    def incomparable(self, a: MaximalProperty, b: MaximalProperty) -> bool:
        return not self.leq(a, b) and not self.leq(b, a)

    def join(self, a: MaximalProperty, b: MaximalProperty) -> MaximalProperty:
        return self.element_for(a.members | b.members)

    def meet(self, a: MaximalProperty, b: MaximalProperty) -> MaximalProperty:
        return self.element_for(a.members & b.members)

    def join_all(self, props: Iterable[MaximalProperty]) -> MaximalProperty:
        members = frozenset()
        for p in props:
            members = members | p.members
        return self.element_for(members)

    def meet_all(self, props: Iterable[MaximalProperty]) -> MaximalProperty:
        members = self.semantics.trace_set
        for p in props:
            members = members & p.members
        return self.element_for(members)


def build_lattice(
    semantics: MaximalSemantics,
    named: Sequence[tuple[str, Callable[[Trace], bool]]],
    powerset: bool = False,
) -> BehaviorLattice:
    """Evaluate each named predicate over the complete traces, add ⊤ and ⊥,
    and close under pairwise union/intersection.

    ``powerset=True`` uses all subsets of S^M instead (only sensible for
    |S^M| ≤ 16).  A named behavior equal to ⊤ triggers an AnalysisWarning:
    nothing below ⊤ can ever be newly guaranteed for it.
    """
    universe = semantics.trace_set
    if not universe:
        raise EmptySemantics("program has no complete traces")

    if powerset:
        if len(universe) > 16:
            raise NotALattice(
                f"powerset lattice over {len(universe)} traces is too large"
            )
        ordered = sorted(universe, key=lambda t: t.texts())
        elements = []
        for mask in range(2 ** len(ordered)):
            members = frozenset(t for i, t in enumerate(ordered) if mask >> i & 1)
            elements.append(MaximalProperty(_subset_name(members, ordered), members))
        return BehaviorLattice(semantics=semantics, elements=tuple(elements))

    by_members: dict[frozenset, MaximalProperty] = {}
    aliases: dict[str, frozenset] = {}
    by_members[frozenset()] = MaximalProperty("⊥", frozenset())
    by_members[universe] = MaximalProperty("⊤", universe)
    for name, predicate in named:
        members = frozenset(t for t in universe if predicate(t))
        if members == universe:
            warnings.warn(
                f"behavior {name!r} holds in every complete trace; "
                "analyses against it are futile",
                AnalysisWarning,
                stacklevel=2,
            )
        if members in by_members:
            # extensionally equal to an existing element; keep its name
            aliases[name] = members
        else:
            by_members[members] = MaximalProperty(name, members)

    changed = True
    while changed:
        changed = False
        current = list(by_members.values())
        for i, a in enumerate(current):
            for b in current[i + 1 :]:
                for members, synth in (
                    (a.members | b.members, f"join({a.name},{b.name})"),
                    (a.members & b.members, f"meet({a.name},{b.name})"),
                ):
                    if members not in by_members:
                        by_members[members] = MaximalProperty(synth, members)
                        changed = True
        if len(by_members) > MAX_CLOSURE_ELEMENTS:
            raise NotALattice("lattice closure exceeded the element budget")

    ordered_elems = sorted(
        by_members.values(), key=lambda p: (len(p.members), p.name)
    )
    return BehaviorLattice(
        semantics=semantics, elements=tuple(ordered_elems), aliases=aliases
    )


def _subset_name(members: frozenset, ordered: list[Trace]) -> str:
    if not members:
        return "⊥"
    if len(members) == len(ordered):
        return "⊤"
    bits = "".join("1" if t in members else "0" for t in ordered)
    return f"subset_{bits}"


def prediction_abstraction(
    semantics: MaximalSemantics, prop: MaximalProperty
) -> PredictionProperty:
    """Prefixes of members whose every complete prolongation stays in the
    behavior: the point along a run from which the behavior is settled."""
    member_prefixes = set()
    for prefix in _prefixes_of(prop.members):
        completions = semantics.completions(prefix)
        if completions and completions <= prop.members:
            member_prefixes.add(prefix)
    return PredictionProperty(frozenset(member_prefixes), prop)


def prediction_concretization(
    semantics: MaximalSemantics, prediction: PredictionProperty | frozenset
) -> frozenset:
    """Q ∩ S^M."""
    member_prefixes = (
        prediction.member_prefixes
        if isinstance(prediction, PredictionProperty)
        else prediction
    )
    return frozenset(member_prefixes) & semantics.trace_set


def _prefixes_of(traces: frozenset) -> set:
    out = set()
    for t in traces:
        for i in range(len(t) + 1):
            out.add(t[:i])
    return out


def property_leaky(
    semantics: MaximalSemantics,
    low_inputs: Iterable[str],
    low_outputs: Iterable[str],
    name: str = "IL",
) -> MaximalProperty:
    """Interference behavior: complete traces for which some other run agrees
    on low inputs but disagrees on low outputs.

    The complement (same low inputs always give the same low outputs) is the
    non-interference behavior.
    """
    low_in = tuple(low_inputs)
    low_out = tuple(sorted(low_outputs))
    program = semantics.program
    declared = set(program.domains)
    for source in low_in:
        if source not in declared:
            raise UnknownName(f"input source {source!r} is not declared")
    program_vars = program.variables()
    for var in low_out:
        if var not in program_vars:
            raise UnknownName(f"variable {var!r} is never assigned")

    def low_in_view(trace: Trace) -> tuple:
        return tuple(
            e.value for e in trace if e.kind == "input" and e.source in low_in
        )

    def low_out_view(trace: Trace) -> tuple:
        env: dict[str, int] = {}
        for e in trace:
            if e.kind in ("assign", "input"):
                env[e.var] = e.value
        return tuple(env.get(v) for v in low_out)

    views = [(t, low_in_view(t), low_out_view(t)) for t in semantics.traces]
    leaky = set()
    for t, ins, outs in views:
        for _, ins2, outs2 in views:
            if ins == ins2 and outs != outs2:
                leaky.add(t)
                break
    return MaximalProperty(name, frozenset(leaky))
