"""traceblame: responsibility analysis for small imperative programs.

Given a program with finite-domain inputs, a lattice of behaviors of
interest, and an observer, the package determines which single event in
each execution is responsible for a behavior — exactly, by exhaustive
trace enumeration, and soundly, by an abstract analysis over Floyd-Hoare
automata with an interval/(dis)equality domain.
"""
from .events import EMPTY, Event, Trace, concat, is_prefix, prefixes
from .language import ParseError, Program, ProgramError, parse
from .lattice import (
    AnalysisWarning,
    BehaviorLattice,
    EmptySemantics,
    MaximalProperty,
    NotALattice,
    PredictionProperty,
    UnknownName,
    build_lattice,
    prediction_abstraction,
    prediction_concretization,
    property_leaky,
)
from .observation import (
    OMNISCIENT,
    CognizanceSpec,
    InvalidTrace,
    ObservationEngine,
    cognizance,
    inquiry,
    observation,
)
from .responsibility import (
    AnalysisRequest,
    ResponsibilityRecord,
    analyze,
    run_pipeline,
)
from .semantics import (
    EvaluationError,
    MaximalSemantics,
    StepBoundExceeded,
    enumerate_semantics,
    is_valid,
)
from .variants import (
    ResponsibilitySextuple,
    UnknownVariant,
    VariantId,
    counterfactual_filter,
    guarantees_newly,
    strictly_counterfactual_filter,
    to_four_tuple,
    variant_analyze,
)

__version__ = "0.1.0"

__all__ = [
    "EMPTY",
    "Event",
    "Trace",
    "concat",
    "is_prefix",
    "prefixes",
    "ParseError",
    "Program",
    "ProgramError",
    "parse",
    "AnalysisWarning",
    "BehaviorLattice",
    "EmptySemantics",
    "MaximalProperty",
    "NotALattice",
    "PredictionProperty",
    "UnknownName",
    "build_lattice",
    "prediction_abstraction",
    "prediction_concretization",
    "property_leaky",
    "OMNISCIENT",
    "CognizanceSpec",
    "InvalidTrace",
    "ObservationEngine",
    "cognizance",
    "inquiry",
    "observation",
    "AnalysisRequest",
    "ResponsibilityRecord",
    "analyze",
    "run_pipeline",
    "EvaluationError",
    "MaximalSemantics",
    "StepBoundExceeded",
    "enumerate_semantics",
    "is_valid",
    "ResponsibilitySextuple",
    "UnknownVariant",
    "VariantId",
    "counterfactual_filter",
    "guarantees_newly",
    "strictly_counterfactual_filter",
    "to_four_tuple",
    "variant_analyze",
]
