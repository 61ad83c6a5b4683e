"""Analysis spec files: behaviors, observers, requests, abstract constraints.

A spec is a JSON object:

    {
      "behaviors": [
        {"name": "RF", "kind": "last_event", "event": "¬(acs>=1)"},
        {"name": "RS", "kind": "complement", "of": "RF"},
        {"name": "RO", "kind": "final", "expr": "acs == 1"},
        {"name": "HP", "kind": "has_prefix", "events": ["apv=1", "i1=0"]},
        {"name": "CT", "kind": "contains_event", "event": "typ=2"},
        {"name": "IL", "kind": "leaky", "low_inputs": ["a"], "low_outputs": ["o"]}
      ],
      "observers": [{"name": "second_admin", "hidden_inputs": ["input_1"]}],
      "requests": [
        {"behavior": "RF", "observer": "second_admin", "variant": "simple"}
      ],
      "abstract": {"behavior": "Bug", "pb": {"L4": "c == 0"},
                   "pnb": {"L4": "c != 0"}, "t": {}},
      "options": {"step_bound": 10000, "unroll_k": 3,
                  "powerset_lattice": false}
    }

A request's optional "traces" field restricts the analyzed complete traces
to a named behavior (default: all of them).  The omniscient observer is
always available under the name "omniscient".
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Any, Callable

from .abstract import AbstractUserSpec
from .absdomain import TOP, AbstractValue
from .events import Trace
from .language import Program, eval_bool, parse_condition
from .lattice import (
    AnalysisWarning,
    BehaviorLattice,
    MaximalProperty,
    UnknownName,
    build_lattice,
    property_leaky,
)
from .observation import OMNISCIENT, CognizanceSpec, ObservationEngine
from .responsibility import AnalysisRequest, ResponsibilityRecord, analyze
from .semantics import (
    DEFAULT_STEP_BOUND,
    MaximalSemantics,
    enumerate_semantics,
    final_env,
)
from .variants import VariantId, sextuple_sort_key, to_four_tuple, variant_analyze


class SpecError(Exception):
    """Malformed or inconsistent analysis spec."""


@dataclass
class BehaviorDef:
    name: str
    kind: str
    params: dict


@dataclass
class AnalysisSpec:
    behaviors: list[BehaviorDef]
    observers: list[CognizanceSpec]
    requests: list[AnalysisRequest]
    abstract: dict | None = None
    step_bound: int = DEFAULT_STEP_BOUND
    unroll_k: int = 3
    powerset_lattice: bool = False


_BEHAVIOR_KINDS = {
    "final", "last_event", "contains_event", "has_prefix", "complement", "leaky",
}


def load_spec(text: str) -> AnalysisSpec:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"spec is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise SpecError("spec must be a JSON object")

    behaviors = []
    seen_names = set()
    for entry in raw.get("behaviors", ()):
        name = entry.get("name")
        kind = entry.get("kind")
        if not name or kind not in _BEHAVIOR_KINDS:
            raise SpecError(f"bad behavior entry: {entry!r}")
        if name in seen_names:
            raise SpecError(f"behavior {name!r} defined twice")
        seen_names.add(name)
        params = {k: v for k, v in entry.items() if k not in ("name", "kind")}
        behaviors.append(BehaviorDef(name, kind, params))

    observers = [OMNISCIENT]
    for entry in raw.get("observers", ()):
        name = entry.get("name")
        if not name:
            raise SpecError(f"observer without a name: {entry!r}")
        if name == "omniscient" and entry.get("hidden_inputs"):
            raise SpecError("the omniscient observer cannot hide inputs")
        observers.append(
            CognizanceSpec(name, frozenset(entry.get("hidden_inputs", ())))
        )

    requests = []
    for entry in raw.get("requests", ()):
        behavior = entry.get("behavior")
        if not behavior:
            raise SpecError(f"request without a behavior: {entry!r}")
        requests.append(
            AnalysisRequest(
                behavior=behavior,
                observer=entry.get("observer", "omniscient"),
                variant=entry.get("variant", "simple"),
                traces_of_interest=entry.get("traces"),
            )
        )

    options = raw.get("options", {})
    spec = AnalysisSpec(
        behaviors=behaviors,
        observers=observers,
        requests=requests,
        abstract=raw.get("abstract"),
        step_bound=options.get("step_bound", DEFAULT_STEP_BOUND),
        unroll_k=options.get("unroll_k", 3),
        powerset_lattice=options.get("powerset_lattice", False),
    )
    _validate(spec)
    return spec


def load_spec_file(path: str) -> AnalysisSpec:
    with open(path, encoding="utf-8") as handle:
        return load_spec(handle.read())


def _validate(spec: AnalysisSpec) -> None:
    behavior_names = {b.name for b in spec.behaviors}
    observer_names = {o.observer_name for o in spec.observers}
    for b in spec.behaviors:
        if b.kind == "complement" and b.params.get("of") not in behavior_names:
            raise SpecError(f"complement behavior {b.name!r} references "
                            f"unknown behavior {b.params.get('of')!r}")
    for request in spec.requests:
        if request.behavior not in behavior_names:
            raise SpecError(f"request references unknown behavior {request.behavior!r}")
        if request.observer not in observer_names:
            raise SpecError(f"request references unknown observer {request.observer!r}")
        if request.traces_of_interest is not None and (
            request.traces_of_interest not in behavior_names
        ):
            raise SpecError(
                f"request trace filter references unknown behavior "
                f"{request.traces_of_interest!r}"
            )
        VariantId.from_token(request.variant)  # raises UnknownVariant
    if not spec.requests and spec.abstract is None:
        raise SpecError("spec has neither requests nor an abstract section")


# --- behavior construction ----------------------------------------------------


def behavior_members(
    definition: BehaviorDef,
    semantics: MaximalSemantics,
    resolved: dict[str, frozenset],
) -> frozenset:
    kind, params = definition.kind, definition.params
    if kind == "final":
        cond = parse_condition(params["expr"])

        def final_pred(trace: Trace) -> bool:
            env = final_env(trace)
            try:
                return eval_bool(cond, env)
            except Exception:
                return False

        return frozenset(t for t in semantics.traces if final_pred(t))
    if kind == "last_event":
        text = params["event"]
        return frozenset(
            t for t in semantics.traces if len(t) and t[-1].text == text
        )
    if kind == "contains_event":
        text = params["event"]
        return frozenset(
            t for t in semantics.traces if any(e.text == text for e in t)
        )
    if kind == "has_prefix":
        wanted = tuple(params["events"])
        return frozenset(
            t for t in semantics.traces if t.texts()[: len(wanted)] == wanted
        )
    if kind == "complement":
        return semantics.trace_set - resolved[params["of"]]
    if kind == "leaky":
        return property_leaky(
            semantics,
            params.get("low_inputs", ()),
            params.get("low_outputs", ()),
            name=definition.name,
        ).members
    raise SpecError(f"unknown behavior kind {kind!r}")


def build_behavior_lattice(
    spec: AnalysisSpec, semantics: MaximalSemantics
) -> BehaviorLattice:
    resolved: dict[str, frozenset] = {}
    named: list[tuple[str, Callable[[Trace], bool]]] = []
    for definition in spec.behaviors:
        members = behavior_members(definition, semantics, resolved)
        resolved[definition.name] = members
        named.append((definition.name, members.__contains__))
    return build_lattice(semantics, named, powerset=spec.powerset_lattice)


# --- pipeline -------------------------------------------------------------------


@dataclass
class ReportRow:
    observer: str
    behavior: str
    variant: str
    trace: tuple[str, ...]
    r_index: int
    r_event: str
    h_len: int
    classification: str
    ref_history: tuple[str, ...] | None = None
    ref_future: tuple[str, ...] | None = None

    def to_json(self) -> dict:
        row: dict[str, Any] = {
            "observer": self.observer,
            "behavior": self.behavior,
            "variant": self.variant,
            "trace": list(self.trace),
            "r_index": self.r_index,
            "r_event": self.r_event,
            "h_len": self.h_len,
            "classification": self.classification,
        }
        if self.ref_history is not None:
            row["ref_history"] = list(self.ref_history)
            row["ref_future"] = list(self.ref_future or ())
        return row


@dataclass
class AnalysisReport:
    rows: list[ReportRow] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def execute(program: Program, spec: AnalysisSpec) -> AnalysisReport:
    """Steps I-IV for every request: semantics, lattice, observation,
    responsibility (plain or a refined variant)."""
    report = AnalysisReport()
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", AnalysisWarning)
        semantics = enumerate_semantics(program, step_bound=spec.step_bound)
        lattice = build_behavior_lattice(spec, semantics)
        engines: dict[str, ObservationEngine] = {}
        observers = {o.observer_name: o for o in spec.observers}
        for request in spec.requests:
            observer = observers[request.observer]
            engine = engines.get(request.observer)
            if engine is None:
                engine = ObservationEngine(semantics, lattice, observer)
                engines[request.observer] = engine
            behavior = lattice.by_name(request.behavior)
            if behavior.members == semantics.trace_set:
                warnings.warn(
                    f"request against ⊤-behavior {request.behavior!r} "
                    "cannot find anything responsible",
                    AnalysisWarning,
                    stacklevel=1,
                )
            traces = semantics.traces
            if request.traces_of_interest is not None:
                members = lattice.by_name(request.traces_of_interest).members
                traces = tuple(t for t in semantics.traces if t in members)
            variant = VariantId.from_token(request.variant)
            if variant == VariantId("plain", "bottom", True):
                records = analyze(
                    semantics, lattice, observer, behavior, traces, engine=engine
                )
                report.rows.extend(
                    _record_row(r, request.variant) for r in records
                )
            else:
                sextuples = variant_analyze(
                    semantics, lattice, observer, behavior, traces, variant,
                    engine=engine,
                )
                if variant.project:
                    records = sorted(
                        to_four_tuple(sextuples, observer.observer_name),
                        key=lambda r: (r.trace.texts(), r.index),
                    )
                    report.rows.extend(
                        _record_row(r, request.variant) for r in records
                    )
                else:
                    for s in sorted(sextuples, key=sextuple_sort_key):
                        report.rows.append(
                            ReportRow(
                                observer=observer.observer_name,
                                behavior=s.behavior,
                                variant=request.variant,
                                trace=s.trace.texts(),
                                r_index=s.index,
                                r_event=s.responsible.text,
                                h_len=len(s.history),
                                classification="responsible",
                                ref_history=s.ref_history.texts(),
                                ref_future=s.ref_future.texts(),
                            )
                        )
        report.warnings.extend(str(w.message) for w in caught)
    return report


def _record_row(record: ResponsibilityRecord, variant: str) -> ReportRow:
    return ReportRow(
        observer=record.observer,
        behavior=record.behavior,
        variant=variant,
        trace=record.trace.texts(),
        r_index=record.index,
        r_event=record.responsible.text,
        h_len=len(record.history),
        classification="responsible",
    )


# --- abstract section -----------------------------------------------------------


def abstract_user_spec(
    program: Program, spec: AnalysisSpec
) -> tuple[str, AbstractUserSpec]:
    """Build the per-point abstract constraints from the spec's abstract
    section; returns (behavior label, user spec)."""
    section = spec.abstract
    if not section:
        raise SpecError("spec has no abstract section")
    label = section.get("behavior", "b")
    user = AbstractUserSpec()
    known = set(program.points) | {program.exit_point}
    for key, table in (("t", user.t), ("pb", user.pb), ("pnb", user.pnb)):
        for point, text in section.get(key, {}).items():
            if point not in known:
                raise SpecError(f"abstract constraint names unknown point {point!r}")
            table[point] = _constraint_value(text)
    if not user.pb or not user.pnb:
        raise SpecError("abstract section must constrain both pb and pnb")
    return label, user


def _constraint_value(text: str) -> AbstractValue:
    try:
        cond = parse_condition(text)
    except Exception as exc:
        raise SpecError(f"bad abstract constraint {text!r}: {exc}") from exc
    return TOP.constrain(cond, True)
