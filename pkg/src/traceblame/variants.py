"""Refined responsibility: counterfactual filters and the witness family.

A sextuple ⟨H, R, F, B, H̄, F̄⟩ pairs a carrier split (HRF is an analyzed
complete trace containing R) with a witness run (H̄RF̄ is a complete trace
in which R newly guarantees the behavior B: the observation of H̄R is at
least B while the observation of H̄ alone is not).

Four shapes constrain how the witness may relate to the carrier:

    top          any witness            (R blamed wherever it occurs)
    history_only H = H̄
    future_only  F = F̄
    bottom       both                   (the plain single-trace reading)

Three bases decide whether a counterfactual alternative is required:

    plain                    no extra condition
    counterfactual           some single replacement R' and some prefix F'
                             of F̄ reach a behavior incomparable with B
    strictly_counterfactual  the incomparable behavior is reached by H̄R'
                             immediately

plus the special variant ``pearl``: counterfactual, with the carrier only
required to share the tail of the witness future after the split.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .events import Event, Trace, concat
from .lattice import BehaviorLattice, MaximalProperty
from .observation import CognizanceSpec, InvalidTrace, ObservationEngine
from .responsibility import ResponsibilityRecord, record_sort_key
from .semantics import MaximalSemantics


class UnknownVariant(Exception):
    """Variant token not in the supported family."""


BASES = ("plain", "counterfactual", "strictly_counterfactual")
SHAPES = ("top", "history_only", "future_only", "bottom")

_TOKENS = {
    "simple": ("plain", "bottom", True),
    "C": ("counterfactual", "bottom", True),
    "SC": ("strictly_counterfactual", "bottom", True),
    "top": ("plain", "top", False),
    "H": ("plain", "history_only", False),
    "F": ("plain", "future_only", False),
    "bot": ("plain", "bottom", False),
    "C-top": ("counterfactual", "top", False),
    "C-H": ("counterfactual", "history_only", False),
    "C-F": ("counterfactual", "future_only", False),
    "C-bot": ("counterfactual", "bottom", False),
    "SC-top": ("strictly_counterfactual", "top", False),
    "SC-H": ("strictly_counterfactual", "history_only", False),
    "SC-F": ("strictly_counterfactual", "future_only", False),
    "SC-bot": ("strictly_counterfactual", "bottom", False),
    "pearl": ("counterfactual", "pearl", False),
}


@dataclass(frozen=True)
class VariantId:
    base: str
    shape: str  # one of SHAPES or "pearl"
    project: bool = False  # report 4-tuples instead of sextuples

    @classmethod
    def from_token(cls, token: str) -> "VariantId":
        try:
            base, shape, project = _TOKENS[token]
        except KeyError:
            raise UnknownVariant(
                f"unknown variant {token!r}; expected one of {', '.join(_TOKENS)}"
            ) from None
        return cls(base, shape, project)

    @property
    def pearl(self) -> bool:
        return self.shape == "pearl"


VARIANT_TOKENS = tuple(_TOKENS)


@dataclass(frozen=True)
class ResponsibilitySextuple:
    history: Trace
    responsible: Event
    future: Trace
    behavior: str
    ref_history: Trace
    ref_future: Trace

    @property
    def index(self) -> int:
        return len(self.history)

    @property
    def trace(self) -> Trace:
        return Trace(self.history.events + (self.responsible,) + self.future.events)

    def __repr__(self) -> str:
        return (
            f"Sextuple({self.responsible.text} @ {self.index} for {self.behavior}, "
            f"ref H̄={self.ref_history.render()}, F̄={self.ref_future.render()})"
        )


def guarantees_newly(
    engine: ObservationEngine, ref_history: Trace, event: Event, behavior: MaximalProperty
) -> bool:
    """True iff appending the event to the reference history moves the
    observation from "not within the behavior" to "within it" (and the
    extended observation is not the invalidity bottom)."""
    extended = ref_history.append(event)
    if not engine.semantics.is_valid(extended):
        raise InvalidTrace(f"not a valid prefix: {extended.render()}")
    obs_after = engine.observation(extended)
    if not obs_after.members or not engine.lattice.leq(obs_after, behavior):
        return False
    obs_before = engine.observation(ref_history)
    return not engine.lattice.leq(obs_before, behavior)


def _witnesses(engine: ObservationEngine, behavior: MaximalProperty) -> dict:
    """For each event R, the pairs (H̄, F̄) splitting some complete trace
    H̄RF̄ such that R newly guarantees the behavior after H̄."""
    table: dict[Event, list[tuple[Trace, Trace]]] = {}
    for trace in engine.semantics.traces:
        for i in range(len(trace)):
            if guarantees_newly(engine, trace[:i], trace[i], behavior):
                table.setdefault(trace[i], []).append((trace[:i], trace[i + 1 :]))
    return table


def _incomparable_reachable(
    engine: ObservationEngine,
    behavior: MaximalProperty,
    ref_history: Trace,
    future_prefix_bound: Trace,
    require_tail_of: Trace | None = None,
) -> bool:
    """Search for a single-event replacement R' and a split F̄ = F'F'' such
    that H̄R'F' is valid and guarantees a behavior incomparable with B.

    ``require_tail_of``: when given (the pearl variant), additionally require
    that this trace ends with the tail F''.
    """
    lattice = engine.lattice
    semantics = engine.semantics
    incomparables = [p for p in lattice if lattice.incomparable(behavior, p)]
    if not incomparables:
        return False
    for alt in semantics.successor_events(ref_history):
        base = ref_history.append(alt)
        for split in range(len(future_prefix_bound) + 1):
            candidate = concat(base, future_prefix_bound[:split])
            if not semantics.is_valid(candidate):
                break  # longer extensions of an invalid trace stay invalid
            if require_tail_of is not None:
                tail = future_prefix_bound[split:]
                if not _ends_with(require_tail_of, tail):
                    continue
            obs = engine.observation(candidate)
            if not obs.members:
                continue
            if any(lattice.leq(obs, p) for p in incomparables):
                return True
    return False


def _ends_with(trace: Trace, tail: Trace) -> bool:
    n = len(tail)
    if n == 0:
        return True
    return len(trace) >= n and trace.events[-n:] == tail.events


def counterfactual_filter(
    records: Iterable[ResponsibilitySextuple],
    semantics: MaximalSemantics,
    lattice: BehaviorLattice,
    spec: CognizanceSpec,
    engine: ObservationEngine | None = None,
) -> frozenset:
    """Keep sextuples for which replacing R after H̄ by some other single
    event can, possibly after part of the witness future, guarantee a
    behavior incomparable with B (which then excludes B)."""
    if engine is None:
        engine = ObservationEngine(semantics, lattice, spec)
    kept = []
    for record in records:
        behavior = lattice.by_name(record.behavior)
        if _incomparable_reachable(
            engine, behavior, record.ref_history, record.ref_future
        ):
            kept.append(record)
    return frozenset(kept)


def strictly_counterfactual_filter(
    records: Iterable[ResponsibilitySextuple],
    semantics: MaximalSemantics,
    lattice: BehaviorLattice,
    spec: CognizanceSpec,
    engine: ObservationEngine | None = None,
) -> frozenset:
    """As counterfactual_filter, but the incomparable behavior must be
    guaranteed immediately after the replacement (empty future part)."""
    if engine is None:
        engine = ObservationEngine(semantics, lattice, spec)
    kept = []
    for record in records:
        behavior = lattice.by_name(record.behavior)
        if _incomparable_reachable(
            engine, behavior, record.ref_history, Trace()
        ):
            kept.append(record)
    return frozenset(kept)


def variant_analyze(
    semantics: MaximalSemantics,
    lattice: BehaviorLattice,
    spec: CognizanceSpec,
    behavior: MaximalProperty,
    traces: Iterable[Trace] | None = None,
    variant: VariantId | str = VariantId("plain", "bottom"),
    engine: ObservationEngine | None = None,
) -> frozenset:
    """Sextuples of the requested variant over the analyzed traces."""
    if isinstance(variant, str):
        variant = VariantId.from_token(variant)
    if variant.base not in BASES or (
        variant.shape not in SHAPES and not variant.pearl
    ):
        raise UnknownVariant(f"unsupported variant {variant!r}")
    if engine is None:
        engine = ObservationEngine(semantics, lattice, spec)
    analyzed = semantics.traces if traces is None else tuple(traces)
    witnesses = _witnesses(engine, behavior)

    out = []
    for trace in analyzed:
        if not semantics.is_maximal(trace):
            continue
        for i in range(len(trace)):
            history, event, future = trace[:i], trace[i], trace[i + 1 :]
            for ref_history, ref_future in witnesses.get(event, ()):
                if variant.shape == "history_only" and ref_history != history:
                    continue
                if variant.shape == "future_only" and ref_future != future:
                    continue
                if variant.shape == "bottom" and (
                    ref_history != history or ref_future != future
                ):
                    continue
                record = ResponsibilitySextuple(
                    history=history,
                    responsible=event,
                    future=future,
                    behavior=behavior.name,
                    ref_history=ref_history,
                    ref_future=ref_future,
                )
                if variant.pearl:
                    if _incomparable_reachable(
                        engine, behavior, ref_history, ref_future,
                        require_tail_of=future,
                    ):
                        out.append(record)
                    continue
                if variant.base == "counterfactual":
                    if not _incomparable_reachable(
                        engine, behavior, ref_history, ref_future
                    ):
                        continue
                elif variant.base == "strictly_counterfactual":
                    if not _incomparable_reachable(
                        engine, behavior, ref_history, Trace()
                    ):
                        continue
                out.append(record)
    return frozenset(out)


def to_four_tuple(
    records: Iterable[ResponsibilitySextuple], observer: str = "omniscient"
) -> frozenset:
    """Project away the witness components, deduplicating."""
    return frozenset(
        ResponsibilityRecord(
            history=r.history,
            responsible=r.responsible,
            future=r.future,
            behavior=r.behavior,
            observer=observer,
        )
        for r in records
    )


def sextuple_sort_key(record: ResponsibilitySextuple):
    trace = record.trace
    input_choices = tuple(e.value for e in trace if e.kind == "input")
    return (
        input_choices,
        trace.texts(),
        record.index,
        record.ref_history.texts(),
        record.ref_future.texts(),
    )
