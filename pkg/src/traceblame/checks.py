"""Executable properties of the analysis, plus a random program generator.

Each check returns a list of violation descriptions (empty = pass).  The
`check` CLI subcommand runs the instance-level checks against one program
and spec; the randomized corpus in the test suite runs them, plus the
cross-variant algebra and the abstract soundness checks, over generated
programs.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .abstract import (
    AbstractUserSpec,
    EventualityOracle,
    analyze_abstract,
)
from .events import EMPTY, Trace, concat, is_prefix, prefixes
from .language import Program, parse, parse_condition
from .lattice import (
    BehaviorLattice,
    MaximalProperty,
    build_lattice,
    prediction_abstraction,
    prediction_concretization,
)
from .observation import (
    OMNISCIENT,
    CognizanceSpec,
    ObservationEngine,
    hidden_control_flow,
)
from .responsibility import analyze
from .semantics import MaximalSemantics, enumerate_semantics, replay_states
from .variants import VariantId, to_four_tuple, variant_analyze


# --- order and lattice laws -------------------------------------------------


def check_prefix_order(semantics: MaximalSemantics, sample: int = 64) -> list[str]:
    out = []
    traces = sorted(semantics.valid_prefixes, key=lambda t: t.texts())[:sample]
    for a in traces:
        if not is_prefix(a, a):
            out.append(f"⪯ not reflexive on {a.render()}")
    for a, b in itertools.islice(itertools.combinations(traces, 2), 2048):
        if is_prefix(a, b) and is_prefix(b, a) and a != b:
            out.append(f"⪯ not antisymmetric on {a.render()} / {b.render()}")
    for a, b, c in itertools.islice(itertools.combinations(traces, 3), 2048):
        if is_prefix(a, b) and is_prefix(b, c) and not is_prefix(a, c):
            out.append("⪯ not transitive")
    closed = prefixes(semantics.trace_set)
    if prefixes(closed) != closed:
        out.append("prefixes not idempotent")
    if not semantics.trace_set <= closed:
        out.append("prefixes not extensive")
    return out


def check_prediction_galois(
    semantics: MaximalSemantics, subsets: int = 64, rng: random.Random | None = None
) -> list[str]:
    """γ∘α = id on subsets of the complete traces, and α∘γ = id on images."""
    out = []
    universe = sorted(semantics.trace_set, key=lambda t: t.texts())
    rng = rng or random.Random(0)
    picks = [frozenset(), frozenset(universe)]
    for _ in range(subsets):
        picks.append(frozenset(t for t in universe if rng.random() < 0.5))
    for members in picks:
        prop = MaximalProperty("p", members)
        alpha = prediction_abstraction(semantics, prop)
        if prediction_concretization(semantics, alpha) != members:
            out.append(f"γ∘α ≠ id on a subset of size {len(members)}")
        again = prediction_abstraction(
            semantics,
            MaximalProperty("p2", prediction_concretization(semantics, alpha)),
        )
        if again.member_prefixes != alpha.member_prefixes:
            out.append(f"α∘γ∘α ≠ α on a subset of size {len(members)}")
    return out


def check_prediction_persistence(
    semantics: MaximalSemantics, lattice: BehaviorLattice
) -> list[str]:
    """Members of a prediction property stay members along valid extensions,
    and every complete extension has the behavior."""
    out = []
    for prop in lattice:
        alpha = prediction_abstraction(semantics, prop).member_prefixes
        for sigma in alpha:
            for done in semantics.completions(sigma):
                if done not in prop.members:
                    out.append(
                        f"{prop.name}: completion escapes the behavior from "
                        f"{sigma.render()}"
                    )
            for event in semantics.successor_events(sigma):
                if sigma.append(event) not in alpha:
                    out.append(
                        f"{prop.name}: prediction not persistent at {sigma.render()}"
                    )
    return out


def check_one_step_completeness(
    semantics: MaximalSemantics, lattice: BehaviorLattice
) -> list[str]:
    """If all valid one-event extensions of a non-maximal prefix guarantee a
    behavior, the prefix already does."""
    out = []
    for prop in lattice:
        alpha = prediction_abstraction(semantics, prop).member_prefixes
        for sigma in semantics.valid_prefixes:
            if semantics.is_maximal(sigma):
                continue
            succ = semantics.successor_events(sigma)
            if succ and all(sigma.append(e) in alpha for e in succ):
                if sigma not in alpha:
                    out.append(
                        f"{prop.name}: one-step completeness fails at {sigma.render()}"
                    )
    return out


# --- observation laws ---------------------------------------------------------


def check_cognizance_extensive(engine: ObservationEngine) -> list[str]:
    out = []
    for sigma in engine.semantics.valid_prefixes:
        if sigma not in engine.cognizance(sigma):
            out.append(f"cognizance not extensive on {sigma.render()}")
    return out


def check_inquiry_monotone(engine: ObservationEngine) -> list[str]:
    out = []
    for sigma in engine.semantics.valid_prefixes:
        value = engine.inquiry(sigma).members
        for event in engine.semantics.successor_events(sigma):
            longer = engine.inquiry(sigma.append(event)).members
            if not longer <= value:
                out.append(f"inquiry not decreasing at {sigma.render()}")
    return out


def check_observation_monotone(engine: ObservationEngine) -> list[str]:
    out = []
    for sigma in engine.semantics.valid_prefixes:
        value = engine.observation(sigma).members
        for event in engine.semantics.successor_events(sigma):
            longer = engine.observation(sigma.append(event)).members
            if not longer <= value:
                out.append(
                    f"observation not decreasing at {sigma.render()} "
                    f"for {engine.cognizance_spec.observer_name}"
                )
    return out


def check_observation_guarantee(engine: ObservationEngine) -> list[str]:
    """Every complete extension of a prefix lies in its observation."""
    out = []
    for sigma in engine.semantics.valid_prefixes:
        value = engine.observation(sigma).members
        if not engine.semantics.completions(sigma) <= value:
            out.append(f"observation guarantee broken at {sigma.render()}")
    return out


def check_inquiry_one_step_join(engine: ObservationEngine) -> list[str]:
    out = []
    for sigma in engine.semantics.valid_prefixes:
        if engine.semantics.is_maximal(sigma):
            continue
        joined = frozenset()
        for event in engine.semantics.successor_events(sigma):
            joined |= engine.inquiry(sigma.append(event)).members
        if joined != engine.inquiry(sigma).members:
            out.append(f"inquiry one-step join fails at {sigma.render()}")
    return out


def check_observation_one_step_join(engine: ObservationEngine) -> list[str]:
    """Valid on observers whose cognizance decomposes over concatenation;
    the omniscient observer always qualifies, hidden-input observers do
    when no hidden input steers control flow."""
    out = []
    for sigma in engine.semantics.valid_prefixes:
        if engine.semantics.is_maximal(sigma):
            continue
        joined = frozenset()
        for event in engine.semantics.successor_events(sigma):
            joined |= engine.observation(sigma.append(event)).members
        if joined != engine.observation(sigma).members:
            out.append(
                f"observation one-step join fails at {sigma.render()} for "
                f"{engine.cognizance_spec.observer_name}"
            )
    return out


def observation_one_step_join_applicable(
    program: Program, spec: CognizanceSpec
) -> bool:
    return spec.omniscient or not hidden_control_flow(program, spec.hidden_sources)


# --- responsibility laws ----------------------------------------------------------


def check_per_trace_uniqueness(
    semantics: MaximalSemantics,
    lattice: BehaviorLattice,
    spec: CognizanceSpec,
    engine: ObservationEngine,
) -> list[str]:
    out = []
    for behavior in lattice:
        records = analyze(semantics, lattice, spec, behavior, engine=engine)
        seen: dict[Trace, int] = {}
        for record in records:
            seen[record.trace] = seen.get(record.trace, 0) + 1
        for trace, count in seen.items():
            if count > 1:
                out.append(
                    f"{behavior.name}: {count} records in one trace "
                    f"({trace.render()}) for {spec.observer_name}"
                )
    return out


def check_join_preservation(
    semantics: MaximalSemantics,
    lattice: BehaviorLattice,
    spec: CognizanceSpec,
    behavior: MaximalProperty,
    engine: ObservationEngine,
    rng: random.Random,
) -> list[str]:
    traces = list(semantics.traces)
    rng.shuffle(traces)
    half = len(traces) // 2
    t1, t2 = traces[:half], traces[half:]
    split = set(
        analyze(semantics, lattice, spec, behavior, t1, engine=engine)
    ) | set(analyze(semantics, lattice, spec, behavior, t2, engine=engine))
    whole = set(
        analyze(semantics, lattice, spec, behavior, t1 + t2, engine=engine)
    )
    if split != whole:
        return [f"{behavior.name}: analyze does not preserve joins on traces"]
    return []


def check_determined_never_responsible(
    semantics: MaximalSemantics,
    lattice: BehaviorLattice,
    spec: CognizanceSpec,
    engine: ObservationEngine,
) -> list[str]:
    out = []
    determined = {
        sigma
        for sigma in semantics.valid_prefixes
        if len(semantics.successor_events(sigma)) == 1
    }
    for behavior in lattice:
        for record in analyze(semantics, lattice, spec, behavior, engine=engine):
            if record.history in determined:
                out.append(
                    f"{behavior.name}: determined event {record.responsible.text} "
                    f"held responsible for {spec.observer_name}"
                )
    return out


def check_responsibility_counterfactual_witness(
    semantics: MaximalSemantics,
    lattice: BehaviorLattice,
    spec: CognizanceSpec,
    behavior: MaximalProperty,
    engine: ObservationEngine,
) -> list[str]:
    """For every record there is another valid one-event extension of the
    history that does not guarantee the behavior."""
    out = []
    for record in analyze(semantics, lattice, spec, behavior, engine=engine):
        extended = record.history.append(record.responsible)
        if not engine.lattice.leq(engine.observation(extended), behavior):
            out.append(f"{behavior.name}: record does not guarantee the behavior")
            continue
        alternatives = [
            e
            for e in semantics.successor_events(record.history)
            if not engine.lattice.leq(
                engine.observation(record.history.append(e)), behavior
            )
        ]
        if not alternatives:
            out.append(
                f"{behavior.name}: no alternative extension avoids the behavior "
                f"after {record.history.render()}"
            )
    return out


# --- variant algebra ---------------------------------------------------------------


def check_variant_chain(
    semantics: MaximalSemantics,
    lattice: BehaviorLattice,
    spec: CognizanceSpec,
    behavior: MaximalProperty,
    engine: ObservationEngine,
) -> list[str]:
    out = []
    projected = {}
    for token in ("simple", "C", "SC"):
        sextuples = variant_analyze(
            semantics, lattice, spec, behavior,
            variant=VariantId.from_token(token), engine=engine,
        )
        projected[token] = to_four_tuple(sextuples, spec.observer_name)
    if not projected["SC"] <= projected["C"]:
        out.append(f"{behavior.name}: SC ⊄ C after projection")
    if not projected["C"] <= projected["simple"]:
        out.append(f"{behavior.name}: C ⊄ plain after projection")
    return out


def check_shape_bottom_intersection(
    semantics: MaximalSemantics,
    lattice: BehaviorLattice,
    spec: CognizanceSpec,
    behavior: MaximalProperty,
    engine: ObservationEngine,
    base: str = "plain",
) -> list[str]:
    shapes = {
        shape: variant_analyze(
            semantics, lattice, spec, behavior,
            variant=VariantId(base, shape), engine=engine,
        )
        for shape in ("top", "history_only", "future_only", "bottom")
    }
    out = []
    if shapes["bottom"] != shapes["history_only"] & shapes["future_only"]:
        out.append(f"{behavior.name}/{base}: bottom ≠ history ∩ future")
    if not (shapes["history_only"] | shapes["future_only"]) <= shapes["top"]:
        out.append(f"{behavior.name}/{base}: history ∪ future ⊄ top")
    return out


def check_shape_top_union(
    semantics: MaximalSemantics,
    lattice: BehaviorLattice,
    spec: CognizanceSpec,
    behavior: MaximalProperty,
    engine: ObservationEngine,
    base: str = "plain",
) -> list[str]:
    """The claimed equality top = history ∪ future.  The containment ⊇ always
    holds; the converse fails for witness pairs that match the carrier in
    neither component (see the analysis notes)."""
    shapes = {
        shape: variant_analyze(
            semantics, lattice, spec, behavior,
            variant=VariantId(base, shape), engine=engine,
        )
        for shape in ("top", "history_only", "future_only")
    }
    if shapes["top"] != shapes["history_only"] | shapes["future_only"]:
        return [f"{behavior.name}/{base}: top ≠ history ∪ future"]
    return []


def check_pearl_superset(
    semantics: MaximalSemantics,
    lattice: BehaviorLattice,
    spec: CognizanceSpec,
    behavior: MaximalProperty,
    engine: ObservationEngine,
) -> list[str]:
    cf = variant_analyze(
        semantics, lattice, spec, behavior,
        variant=VariantId("counterfactual", "future_only"), engine=engine,
    )
    pearl = variant_analyze(
        semantics, lattice, spec, behavior,
        variant=VariantId("counterfactual", "pearl"), engine=engine,
    )
    if not cf <= pearl:
        return [f"{behavior.name}: counterfactual/future ⊄ pearl"]
    return []


# --- abstract soundness ----------------------------------------------------------


def check_abstract_soundness(
    program: Program,
    semantics: MaximalSemantics,
    lattice: BehaviorLattice,
    behavior: MaximalProperty,
    cond_text: str,
) -> list[str]:
    """Theorem check: concrete responsibility is covered by the abstract
    verdicts, and definite verdicts are concretely realized on their path."""
    out = []
    records = analyze(semantics, lattice, OMNISCIENT, behavior)
    user = AbstractUserSpec.for_exit_condition(program, parse_condition(cond_text))
    oracles = (
        EventualityOracle.exact(program, user, semantics),
        EventualityOracle.disabled(),
    )
    for oracle in oracles:
        automaton, marks, verdicts = analyze_abstract(
            program, user, "b", oracle=oracle
        )
        covered = {a.point for a in verdicts.all_actions}
        for record in records:
            if record.responsible.point not in covered:
                out.append(
                    f"{behavior.name} [{oracle.mode}]: concrete responsibility at "
                    f"{record.responsible.point} missed by the abstract analysis"
                )
        for path_names, action in verdicts.definite:
            if not _definite_realized(
                program, semantics, automaton, path_names, action, records
            ):
                out.append(
                    f"{behavior.name} [{oracle.mode}]: definite action at "
                    f"{action.point} has no concretization with that responsibility"
                )
    return out


def _definite_realized(program, semantics, automaton, path_names, action, records):
    nodes = [automaton.node_named(name) for name in path_names]
    record_points = {}
    for r in records:
        record_points.setdefault(r.trace, set()).add(r.responsible.point)
    for trace in semantics.traces:
        states = replay_states(program, trace)
        if len(states) != len(nodes):
            continue
        if all(
            node.point == point and node.invariant.satisfied_by(env)
            for node, (point, env) in zip(nodes, states)
        ):
            if action.point in record_points.get(trace, ()):
                return True
    return False


# --- random programs ---------------------------------------------------------------


@dataclass
class GeneratedCase:
    text: str
    program: Program
    behavior_expr: str  # final-state condition defining the behavior


def random_program(rng: random.Random, max_statements: int = 12) -> GeneratedCase:
    """A small program with 1-3 inputs (domains ≤ 3 values), straight-line
    arithmetic and optional if/else, plus a nontrivial final-state behavior.
    Retries until the behavior splits the complete traces."""
    for _ in range(200):
        case = _generate_once(rng, max_statements)
        if case is not None:
            return case
    raise RuntimeError("could not generate a nontrivial case")


def _generate_once(rng: random.Random, max_statements: int) -> GeneratedCase | None:
    n_inputs = rng.randint(1, 3)
    sources = [f"src{i + 1}" for i in range(n_inputs)]
    domains = {}
    for s in sources:
        size = rng.randint(2, 3)
        values = rng.sample(range(-2, 4), size)
        domains[s] = sorted(values)
    var_pool = ["x", "y", "z", "w", "v"]
    lines = []
    defined: list[str] = []
    budget = rng.randint(n_inputs + 1, max_statements)
    statements = 0
    pending_sources = list(sources)

    def an_operand() -> str:
        if defined and rng.random() < 0.7:
            return rng.choice(defined)
        return str(rng.randint(-2, 3))

    def a_condition() -> str:
        left = rng.choice(defined)
        op = rng.choice(["==", "!=", "<", "<=", ">", ">="])
        right = an_operand()
        return f"{left} {op} {right}"

    indent = ""
    open_branch = False
    while statements < budget or pending_sources:
        if pending_sources and (rng.random() < 0.5 or statements >= budget):
            source = pending_sources.pop(0)
            var = rng.choice(var_pool)
            domain = ",".join(str(v) for v in domains[source])
            if open_branch:
                # inputs stay at the top level so every run reads them all
                lines.append("}")
                indent, open_branch = "", False
            lines.append(f"{var} = input {source} in {{{domain}}};")
            defined.append(var)
            statements += 1
            continue
        if statements >= budget:
            break
        roll = rng.random()
        if roll < 0.25 and defined and not open_branch and statements + 2 <= budget:
            lines.append(f"if ({a_condition()}) {{")
            indent, open_branch = "  ", True
            statements += 1
        elif defined:
            var = rng.choice(var_pool)
            op = rng.choice(["+", "-", "*"])
            lines.append(f"{indent}{var} = {an_operand()} {op} {an_operand()};")
            defined.append(var)
            statements += 1
            if open_branch and rng.random() < 0.6:
                lines.append("}")
                indent, open_branch = "", False
        else:
            var = rng.choice(var_pool)
            lines.append(f"{var} = {rng.randint(-2, 3)};")
            defined.append(var)
            statements += 1
    if open_branch:
        lines.append("}")
    text = "\n".join(lines) + "\n"
    try:
        program = parse(text)
    except Exception:
        return None
    semantics = enumerate_semantics(program)
    if len(semantics.traces) < 2:
        return None

    # pick a behavior that genuinely splits the runs, preferring variables
    # defined on every path
    from .semantics import final_env

    always = set.intersection(*(set(final_env(t)) for t in semantics.traces))
    if not always:
        return None
    candidates = sorted(always)
    for _ in range(20):
        var = rng.choice(candidates)
        values = sorted({final_env(t)[var] for t in semantics.traces})
        if len(values) < 2:
            continue
        op = rng.choice(["==", "<=", ">", "!="])
        pivot = rng.choice(values)
        expr = f"{var} {op} {pivot}"
        cond = parse_condition(expr)
        from .language import eval_bool

        members = sum(1 for t in semantics.traces if eval_bool(cond, final_env(t)))
        if 0 < members < len(semantics.traces):
            return GeneratedCase(text=text, program=program, behavior_expr=expr)
    return None


def build_case_lattice(case: GeneratedCase):
    """Semantics plus the four-element lattice {⊥, B, ¬B, ⊤} for a case."""
    from .language import eval_bool
    from .semantics import final_env

    semantics = enumerate_semantics(case.program)
    cond = parse_condition(case.behavior_expr)

    def pred(trace: Trace) -> bool:
        return eval_bool(cond, final_env(trace))

    lattice = build_lattice(
        semantics,
        [("B", pred), ("notB", lambda t: not pred(t))],
    )
    return semantics, lattice


def random_observer(rng: random.Random, program: Program) -> CognizanceSpec:
    sources = program.source_names
    hidden = frozenset(s for s in sources if rng.random() < 0.4)
    if not hidden or hidden == frozenset(sources):
        return OMNISCIENT
    return CognizanceSpec("partial", hidden)


# --- instance-level suite (CLI `check`) ---------------------------------------------


def run_instance_checks(
    program: Program,
    semantics: MaximalSemantics,
    lattice: BehaviorLattice,
    observers: list[CognizanceSpec],
    seed: int = 0,
) -> list[str]:
    rng = random.Random(seed)
    violations = []
    violations += check_prefix_order(semantics)
    violations += check_prediction_galois(semantics, rng=rng)
    violations += check_prediction_persistence(semantics, lattice)
    violations += check_one_step_completeness(semantics, lattice)
    for spec in observers:
        engine = ObservationEngine(
            semantics, lattice, spec, warn_on_hidden_control=False
        )
        violations += check_cognizance_extensive(engine)
        violations += check_inquiry_monotone(engine)
        violations += check_observation_monotone(engine)
        violations += check_observation_guarantee(engine)
        violations += check_inquiry_one_step_join(engine)
        if observation_one_step_join_applicable(program, spec):
            violations += check_observation_one_step_join(engine)
        violations += check_per_trace_uniqueness(semantics, lattice, spec, engine)
        violations += check_determined_never_responsible(
            semantics, lattice, spec, engine
        )
        for behavior in lattice:
            if behavior.members and behavior.members != semantics.trace_set:
                violations += check_join_preservation(
                    semantics, lattice, spec, behavior, engine, rng
                )
                violations += check_responsibility_counterfactual_witness(
                    semantics, lattice, spec, behavior, engine
                )
    return violations
