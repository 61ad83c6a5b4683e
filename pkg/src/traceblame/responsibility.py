"""Which single event in a run settles a behavior.

A record ⟨H, R, F⟩ names the event R in the complete trace HRF such that
the observation after HR is at least as strong as the behavior under
analysis while the observation after H alone is strictly weaker:

    ∅ ⊊ O(HR) ⊆ B ⊊ O(H)

R is necessarily a free choice: if every valid one-event extension of H
were the same event, the observation could not move.  For a fixed
observer, lattice, and behavior, each trace carries at most one record.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .events import Event, Trace
from .lattice import BehaviorLattice, MaximalProperty
from .observation import CognizanceSpec, ObservationEngine
from .semantics import MaximalSemantics


@dataclass(frozen=True)
class ResponsibilityRecord:
    """⟨H, R, F⟩ plus the behavior and observer that produced it."""

    history: Trace
    responsible: Event
    future: Trace
    behavior: str
    observer: str

    @property
    def index(self) -> int:
        return len(self.history)

    @property
    def trace(self) -> Trace:
        return Trace(self.history.events + (self.responsible,) + self.future.events)

    def __repr__(self) -> str:
        return (
            f"ResponsibilityRecord({self.observer}: {self.responsible.text} @ "
            f"{self.index} for {self.behavior})"
        )


@dataclass(frozen=True)
class AnalysisRequest:
    """One analysis to run: behavior name, observer name, variant token,
    optional trace filter (a behavior name; default: every complete trace)."""

    behavior: str
    observer: str
    variant: str = "simple"
    traces_of_interest: str | None = None


def record_sort_key(record: ResponsibilityRecord):
    trace = record.trace
    input_choices = tuple(e.value for e in trace if e.kind == "input")
    return (input_choices, trace.texts(), record.index)


def analyze(
    semantics: MaximalSemantics,
    lattice: BehaviorLattice,
    spec: CognizanceSpec,
    behavior: MaximalProperty,
    traces: Iterable[Trace] | None = None,
    engine: ObservationEngine | None = None,
) -> list[ResponsibilityRecord]:
    """All ⟨H,R,F⟩ with HRF among the analyzed complete traces, |R| = 1, and
    ∅ ⊊ O(HR) ⊆ B ⊊ O(H).  An empty result is a valid outcome."""
    if engine is None:
        engine = ObservationEngine(semantics, lattice, spec)
    analyzed = semantics.traces if traces is None else tuple(traces)
    bottom = lattice.bottom
    records = []
    for trace in analyzed:
        if not semantics.is_maximal(trace):
            continue
        for i in range(len(trace)):
            history = trace[:i]
            extended = trace[: i + 1]
            obs_hr = engine.observation(extended)
            if not obs_hr.members or not lattice.leq(obs_hr, behavior):
                continue
            obs_h = engine.observation(history)
            if behavior.members < obs_h.members:
                records.append(
                    ResponsibilityRecord(
                        history=history,
                        responsible=trace[i],
                        future=trace[i + 1 :],
                        behavior=behavior.name,
                        observer=spec.observer_name,
                    )
                )
    records.sort(key=record_sort_key)
    return records


def run_pipeline(program, analysis_spec):
    """Run the four analysis steps for every request in an analysis spec:
    enumerate the semantics, build the lattice, derive the observation
    functions, and apply the responsibility abstraction (or a variant).

    Returns an AnalysisReport; see traceblame.specfile for the spec format.
    """
    from .specfile import execute  # late import; specfile builds on this module

    return execute(program, analysis_spec)
