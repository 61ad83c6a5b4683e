"""Command-line front end.

Subcommands:

    analyze   --program F --spec S [--variant V] [--format json|table]
    abstract  --program F --spec S [--behavior B] [--no-oracle] [--format ...]
    semantics --program F [--step-bound N] [--format ...]
    check     --program F --spec S [--seed N]

Exit codes: 0 success, 1 program/spec error, 2 internal invariant violation.
"""
from __future__ import annotations

import argparse
import json
import sys

from .abstract import EventualityOracle, analyze_abstract
from .language import ParseError, ProgramError, parse
from .lattice import EmptySemantics, NotALattice, UnknownName
from .observation import InvalidTrace
from .semantics import (
    DEFAULT_STEP_BOUND,
    EvaluationError,
    StepBoundExceeded,
    enumerate_semantics,
)
from .specfile import (
    AnalysisReport,
    SpecError,
    abstract_user_spec,
    build_behavior_lattice,
    execute,
    load_spec_file,
)
from .variants import UnknownVariant, VARIANT_TOKENS

USER_ERRORS = (
    ParseError,
    ProgramError,
    SpecError,
    UnknownName,
    UnknownVariant,
    NotALattice,
    EmptySemantics,
    StepBoundExceeded,
    EvaluationError,
    InvalidTrace,
    OSError,
)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {exc!r}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="traceblame",
        description="Responsibility analysis of small imperative programs",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("analyze", help="concrete responsibility analysis")
    run.add_argument("--program", required=True)
    run.add_argument("--spec", required=True)
    run.add_argument("--variant", choices=VARIANT_TOKENS,
                     help="override the variant of every request")
    run.add_argument("--format", choices=("json", "table"), default="table")
    run.set_defaults(handler=cmd_analyze)

    ab = sub.add_parser("abstract", help="sound abstract responsibility analysis")
    ab.add_argument("--program", required=True)
    ab.add_argument("--spec", required=True)
    ab.add_argument("--behavior", choices=("b", "nb"), default="b",
                    help="which terminal class to analyze")
    ab.add_argument("--no-oracle", action="store_true",
                    help="disable the eventuality oracle (degrades to ⊤ marks)")
    ab.add_argument("--unroll", type=int, default=3)
    ab.add_argument("--format", choices=("json", "table"), default="table")
    ab.set_defaults(handler=cmd_abstract)

    sem = sub.add_parser("semantics", help="dump the complete trace set")
    sem.add_argument("--program", required=True)
    sem.add_argument("--step-bound", type=int, default=DEFAULT_STEP_BOUND)
    sem.add_argument("--format", choices=("json", "table"), default="table")
    sem.set_defaults(handler=cmd_semantics)

    chk = sub.add_parser("check", help="run the property suite on one instance")
    chk.add_argument("--program", required=True)
    chk.add_argument("--spec", required=True)
    chk.add_argument("--seed", type=int, default=0)
    chk.set_defaults(handler=cmd_check)
    return parser


def _read_program(path: str):
    with open(path, encoding="utf-8") as handle:
        return parse(handle.read())


def cmd_analyze(args) -> int:
    program = _read_program(args.program)
    spec = load_spec_file(args.spec)
    if args.variant:
        spec.requests = [
            type(r)(r.behavior, r.observer, args.variant, r.traces_of_interest)
            for r in spec.requests
        ]
    report = execute(program, spec)
    sys.stdout.write(emit_report(report, args.format))
    for message in report.warnings:
        print(f"warning: {message}", file=sys.stderr)
    return 0


def emit_report(report: AnalysisReport, format: str = "json") -> str:
    """Deterministic rendering of analysis rows; JSON round-trips."""
    if format == "json":
        return json.dumps([row.to_json() for row in report.rows], indent=2,
                          ensure_ascii=False) + "\n"
    if not report.rows:
        return "no responsibility records\n"
    headers = ("observer", "behavior", "variant", "r_event", "r_index", "trace")
    rows = [
        (
            row.observer,
            row.behavior,
            row.variant,
            row.r_event,
            str(row.r_index),
            " ▷ ".join(row.trace),
        )
        for row in report.rows
    ]
    widths = [
        max(len(h), *(len(r[i]) for r in rows)) for i, h in enumerate(headers)
    ]
    lines = ["  ".join(h.ljust(widths[i]) for i, h in enumerate(headers))]
    lines.append("  ".join("-" * w for w in widths))
    for r in rows:
        lines.append("  ".join(r[i].ljust(widths[i]) for i in range(len(headers))))
    return "\n".join(lines) + "\n"


def cmd_abstract(args) -> int:
    program = _read_program(args.program)
    spec = load_spec_file(args.spec)
    label, user = abstract_user_spec(program, spec)
    oracle = (
        EventualityOracle.disabled()
        if args.no_oracle
        else EventualityOracle.exact(program, user)
    )
    automaton, marks, verdicts = analyze_abstract(
        program, user, args.behavior, oracle=oracle, unroll_k=args.unroll
    )
    if args.format == "json":
        payload = {
            "behavior": label,
            "class": args.behavior,
            "nodes": [
                {
                    "name": node.name,
                    "invariant": node.invariant.render(),
                    "mark": marks[node],
                }
                for node in automaton.nodes
            ],
            "definite": [
                {"path": list(path), "action": action.label,
                 "classification": "definite"}
                for path, action in verdicts.definite
            ],
            "potential": [
                {"path": list(path), "actions": [a.label for a in actions],
                 "classification": "potential"}
                for path, actions in verdicts.potential
            ],
        }
        print(json.dumps(payload, indent=2, ensure_ascii=False))
        return 0
    print(f"behavior {label} ({args.behavior})")
    for node in automaton.nodes:
        print(f"  node {node.name}: {node.invariant.render()}  mark={marks[node]}")
    if not verdicts.definite and not verdicts.potential:
        print("no responsible action found")
    for path, action in verdicts.definite:
        print(f"definite: {action.label}  (path {' -> '.join(path)})")
    for path, actions in verdicts.potential:
        labels = ", ".join(a.label for a in actions)
        print(f"potential: {labels}  (path {' -> '.join(path)})")
    return 0


def cmd_semantics(args) -> int:
    program = _read_program(args.program)
    semantics = enumerate_semantics(program, step_bound=args.step_bound)
    if args.format == "json":
        print(json.dumps([list(t.texts()) for t in semantics.traces], indent=2,
                         ensure_ascii=False))
        return 0
    for trace in semantics.traces:
        print(trace.render())
    return 0


def cmd_check(args) -> int:
    from .checks import run_instance_checks

    program = _read_program(args.program)
    spec = load_spec_file(args.spec)
    semantics = enumerate_semantics(program, step_bound=spec.step_bound)
    lattice = build_behavior_lattice(spec, semantics)
    violations = run_instance_checks(
        program, semantics, lattice, spec.observers, seed=args.seed
    )
    if violations:
        for v in violations:
            print(f"violation: {v}")
        return 2
    print("all instance checks passed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
