#!/usr/bin/env python3
"""
State-Aggregation POMDP Solver
Command-line entry point: bounds, solve, batch and check
"""

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import config
from algebra.polynomial import system_to_dict
from core.constraints import constraints_to_dict
from core.errors import InstanceFormatError, InvalidInputError, SolverError
from core.geometry import table_rows
from core.pomdp import Pomdp, load_pomdp, random_pomdp, validate
from homotopy.tracker import TrackerOptions
from optimize.checks import run_checks
from optimize.experiments import CSV_COLUMNS, DEFAULT_METHODS, batch_experiment, write_batch_csv
from optimize.solvers import BoundarySweepSolver, KktSolver, Method, SolveReport, solve
from utils.helpers import format_partition, parse_partition

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_SOLVE_FAILURE = 2
EXIT_USAGE = 2
EXIT_CHECK_FAILURE = 3

BOUNDS_COLUMNS = ["partition", "total_components", "relevant_components", "total_bound",
                  "relevant_bound"]
COMPONENT_COLUMNS = ["component", "n_complex", "n_real", "n_positive", "best_local_objective",
                     "n_paths"]


class UsageError(Exception):
    """Inconsistent command-line arguments"""


def parse_partitions(text: str) -> List[Tuple[int, ...]]:
    """Parse semicolon separated partitions such as "3;2,1;1,1,1" """
    try:
        return [parse_partition(part) for part in text.split(";") if part.strip()]
    except ValueError as exc:
        raise UsageError(f"bad partition list {text!r}: {exc}") from exc


def tracker_options(args: argparse.Namespace) -> TrackerOptions:
    overrides = {
        "gamma_seed": args.gamma_seed,
        "threads": args.threads,
        "initial_step": args.initial_step,
        "min_step": args.min_step,
        "max_path_steps": args.max_path_steps,
        "budget": args.budget,
    }
    return TrackerOptions(**{k: v for k, v in overrides.items() if v is not None})


def _emit(text: str, output: Optional[str]):
    if output:
        Path(output).write_text(text)
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def _cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def format_table(rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> str:
    cells = [[_cell(row.get(c)) for c in columns] for row in rows]
    widths = [max([len(c)] + [len(line[k]) for line in cells]) for k, c in enumerate(columns)]
    lines = ["  ".join(c.rjust(w) for c, w in zip(columns, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(v.rjust(w) for v, w in zip(line, widths)) for line in cells]
    return "\n".join(lines) + "\n"


def format_csv(rows: Sequence[Dict[str, Any]], columns: Sequence[str]) -> str:
    stream = io.StringIO()
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(["" if row.get(c) is None else row.get(c) for c in columns] for row in rows)
    return stream.getvalue()


def format_json(data: Any) -> str:
    return json.dumps(data, indent=2) + "\n"


def cmd_bounds(args: argparse.Namespace) -> int:
    """Component counts and degree bounds per partition"""
    partitions = parse_partitions(args.partitions)
    if not partitions:
        raise UsageError("no partition given")
    if args.ns is not None and any(sum(p) != args.ns for p in partitions):
        raise UsageError(f"every partition must sum to --ns {args.ns}")
    rows = table_rows(partitions, args.na)
    fmt = args.format or "table"
    if fmt == "json":
        text = format_json({"n_actions": args.na, "rows": rows})
    elif fmt == "csv":
        text = format_csv(rows, BOUNDS_COLUMNS)
    else:
        text = format_table(rows, BOUNDS_COLUMNS)
    _emit(text, args.output)
    return EXIT_OK


def load_instance(args: argparse.Namespace) -> Pomdp:
    """Read --input or generate from --ns/--na/--partition/--seed"""
    generated = args.partition is not None or args.na is not None or args.ns is not None
    if args.input and generated:
        raise UsageError("give either --input or generator options, not both")
    if args.input:
        return load_pomdp(args.input)
    if args.partition is None or args.na is None:
        raise UsageError("solve needs --input, or --na and --partition")
    sizes = parse_partition(args.partition)
    n_states = args.ns if args.ns is not None else sum(sizes)
    return random_pomdp(n_states, args.na, sizes, args.seed)


def dump_systems(pomdp: Pomdp, method: Method, options: TrackerOptions, path: str):
    """Write the defining constraints and the systems a method will solve"""
    if method is Method.KKT:
        solver = KktSolver(pomdp, options)
    else:
        solver = BoundarySweepSolver(pomdp, method is Method.LAGRANGE_RELEVANT, options)
    document = {
        "constraints": constraints_to_dict(pomdp),
        "systems": [dict(system_to_dict(system), component=label)
                    for label, system in solver.build_systems()],
    }
    Path(path).write_text(format_json(document))
    logger.info("wrote %d systems to %s", len(document["systems"]), path)


def format_report(report: SolveReport, fmt: str) -> str:
    if fmt == "json":
        return format_json(report.to_dict())
    rows = [c.to_dict() for c in report.per_component]
    if fmt == "csv":
        return format_csv(rows, COMPONENT_COLUMNS)
    lines = [f"method      : {report.method.value}",
             f"best value  : {_cell(report.best_value)}",
             f"confirmed   : {report.confirmed}"]
    if report.best_policy is not None:
        lines.append(f"best policy : {report.best_policy.pi.round(6).tolist()}")
    if report.failure:
        lines.append(f"failure     : {report.failure}")
    if rows:
        lines.append(f"totals      : {report.n_complex} complex, {report.n_real} real, "
                     f"{report.n_positive} positive, {report.n_certified} certified")
        lines.append("")
        lines.append(format_table(rows, COMPONENT_COLUMNS).rstrip("\n"))
    return "\n".join(lines) + "\n"


def cmd_solve(args: argparse.Namespace) -> int:
    """Solve one instance with one method"""
    pomdp = load_instance(args)
    violations = validate(pomdp)
    if violations:
        for violation in violations:
            print(f"invalid instance: {violation}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    method = Method(args.method)
    options = tracker_options(args)
    if args.dump_system:
        if not method.polynomial:
            raise UsageError(f"--dump-system needs a polynomial method, not {method.value}")
        dump_systems(pomdp, method, options, args.dump_system)
    try:
        report = solve(pomdp, method, options, confirm=not args.no_confirm,
                       grid_step=args.grid_step, restarts=args.restarts, seed=args.seed)
    except SolverError as exc:
        print(f"solver refused: {exc}", file=sys.stderr)
        return EXIT_SOLVE_FAILURE
    _emit(format_report(report, args.format or "json"), args.output)
    if not report.succeeded:
        print(f"solve failed: {report.failure}", file=sys.stderr)
        return EXIT_SOLVE_FAILURE
    return EXIT_OK


def _parse_methods(text: str) -> List[Method]:
    try:
        return [Method(name.strip()) for name in text.split(",") if name.strip()]
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_batch(args: argparse.Namespace) -> int:
    """Solution-count statistics over random instances"""
    if args.seed is None:
        raise UsageError("batch needs --seed")
    if args.na is None:
        raise UsageError("batch needs --na")
    partitions = parse_partitions(args.partitions)
    if not partitions:
        raise UsageError("no partition given")
    methods = _parse_methods(args.methods)
    options = tracker_options(args)
    rows = []
    for sizes in partitions:
        n_states = sum(sizes)
        if args.ns is not None and args.ns != n_states:
            raise UsageError(f"partition {format_partition(sizes)} does not sum to --ns {args.ns}")
        rows += batch_experiment(n_states, args.na, sizes, args.trials, args.seed, methods, options)

    fmt = args.format or "csv"
    if fmt == "json":
        text = format_json([row.to_dict() for row in rows])
    elif fmt == "table":
        text = format_table([row.as_row() if not row.skipped else
                             dict(partition=row.partition, method=row.method.value,
                                  **{c: "skipped" for c in CSV_COLUMNS[2:]}) for row in rows],
                            CSV_COLUMNS)
    else:
        stream = io.StringIO()
        write_batch_csv(rows, stream)
        text = stream.getvalue()
    _emit(text, args.output)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    """Invariant suites; exit status 3 names the failures"""
    pomdp = load_pomdp(args.input) if args.input else None
    results = run_checks(seed=args.seed if args.seed is not None else 0, tol=args.tol,
                         pomdp=pomdp, options=tracker_options(args))
    fmt = args.format or "table"
    rows = [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]
    if fmt == "json":
        text = format_json(rows)
    elif fmt == "csv":
        text = format_csv(rows, ["name", "passed", "detail"])
    else:
        text = "\n".join(repr(r) for r in results) + "\n"
    _emit(text, args.output)
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK_FAILURE
    return EXIT_OK


def _add_common(parser: argparse.ArgumentParser):
    parser.add_argument("--format", choices=["json", "csv", "table"], default=None)
    parser.add_argument("-o", "--output", help="write to this file instead of stdout")
    parser.add_argument("--seed", type=int, default=None, help="instance generator seed")


def _add_tracker(parser: argparse.ArgumentParser):
    group = parser.add_argument_group("path tracker")
    group.add_argument("--gamma-seed", type=int, default=None)
    group.add_argument("--threads", type=int, default=None, help="1 reproduces byte-identical output")
    group.add_argument("--initial-step", type=float, default=None)
    group.add_argument("--min-step", type=float, default=None)
    group.add_argument("--max-path-steps", type=int, default=None)
    group.add_argument("--budget", type=int, default=None,
                       help=f"Bezout path budget (default ${config.BUDGET_ENV_VAR} "
                            f"or {config.DEFAULT_BEZOUT_BUDGET})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sarop",
                                     description="Critical points of state-aggregation POMDPs")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="warnings only")
    commands = parser.add_subparsers(dest="command", required=True)

    bounds = commands.add_parser("bounds", help="boundary component counts and degree bounds")
    bounds.add_argument("--na", type=int, required=True, help="number of actions")
    bounds.add_argument("--ns", type=int, default=None, help="number of states (checked)")
    bounds.add_argument("--partitions", required=True, help='e.g. "3;2,1;1,1,1"')
    bounds.add_argument("--format", choices=["json", "csv", "table"], default=None)
    bounds.add_argument("-o", "--output")
    bounds.set_defaults(func=cmd_bounds)

    solve_cmd = commands.add_parser("solve", help="solve one instance")
    _add_common(solve_cmd)
    solve_cmd.add_argument("-i", "--input", help="instance JSON file")
    solve_cmd.add_argument("--ns", type=int, default=None)
    solve_cmd.add_argument("--na", type=int, default=None)
    solve_cmd.add_argument("--partition", default=None, help='fiber sizes, e.g. "2,1"')
    solve_cmd.add_argument("--method", choices=[m.value for m in Method],
                           default=Method.LAGRANGE_RELEVANT.value)
    solve_cmd.add_argument("--grid-step", type=float, default=0.01)
    solve_cmd.add_argument("--restarts", type=int, default=0,
                           help="random restarts of projected gradient ascent")
    solve_cmd.add_argument("--dump-system", metavar="PATH", default=None,
                           help="write constraints and polynomial systems as JSON")
    solve_cmd.add_argument("--no-confirm", action="store_true",
                           help="skip the re-run of the winning system")
    _add_tracker(solve_cmd)
    solve_cmd.set_defaults(func=cmd_solve, seed=0)

    batch = commands.add_parser("batch", help="statistics over random instances")
    _add_common(batch)
    batch.add_argument("--ns", type=int, default=None)
    batch.add_argument("--na", type=int, default=None)
    batch.add_argument("--partitions", required=True)
    batch.add_argument("--trials", type=int, default=config.DEFAULT_TRIALS)
    batch.add_argument("--methods", default=",".join(m.value for m in DEFAULT_METHODS))
    _add_tracker(batch)
    batch.set_defaults(func=cmd_batch)

    check = commands.add_parser("check", help="run the invariant suites")
    _add_common(check)
    check.add_argument("-i", "--input", help="check this instance instead of generated ones")
    check.add_argument("--tol", type=float, default=None, help="override every suite tolerance")
    _add_tracker(check)
    check.set_defaults(func=cmd_check)
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point"""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"file not found: {exc.filename}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except InstanceFormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (InvalidInputError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
