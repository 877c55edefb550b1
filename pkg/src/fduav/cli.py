"""Command line entry point.

::

    fduav solve --scenario s.cfg --scheme proposed [--settings opts.json] --out run/
    fduav sweep --param fb_db --values -170:-110:10 --schemes proposed,hd \\
                --scenario s.cfg --out sweep/
    fduav validate run/solution.json

Exit status: 0 on success, 1 on validation errors (bad scenario, infeasible
instance, bad option values), 2 on I/O errors.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .baselines import SchemeId, run_scheme
from .experiments import (
    SweepSpec,
    export_solution,
    load_solution,
    parse_values,
    run_sweep,
    validate_solution,
)
from .scenario import Scenario, ScenarioError, load_scenario
from .subproblems import ScaSettings

logger = logging.getLogger("fduav")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


def load_settings(path) -> ScaSettings:
    if path is None:
        return ScaSettings()
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(doc, dict):
        raise ValueError("settings file must hold a JSON object")
    return ScaSettings.from_mapping(doc)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fduav", description="Full-duplex UAV sum-capacity optimizer")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="optimize one scenario with one scheme")
    solve.add_argument("--scenario", required=True)
    solve.add_argument("--scheme", default="proposed")
    solve.add_argument("--settings")
    solve.add_argument("--out", required=True)

    sweep = sub.add_parser("sweep", help="sweep one scenario parameter over several schemes")
    sweep.add_argument("--param", required=True, help="T, fb_db or H")
    sweep.add_argument("--values", required=True, help="start:stop:step and/or comma list")
    sweep.add_argument("--schemes", default="proposed", help="comma-separated scheme ids")
    sweep.add_argument("--scenario", required=True)
    sweep.add_argument("--settings")
    sweep.add_argument("--out", required=True)

    check = sub.add_parser("validate", help="check an emitted solution.json")
    check.add_argument("solution")
    check.add_argument("--scenario", help="scenario file (default: the copy embedded in the JSON)")
    return parser


def _glue_values(argv):
    # "--values -170:-110:10" would otherwise be read as an unknown option
    out = list(argv)
    for k, arg in enumerate(out[:-1]):
        if arg == "--values":
            out[k:k + 2] = [f"--values={out[k + 1]}"]
            break
    return out


def _cmd_solve(args) -> int:
    scenario = load_scenario(args.scenario)
    settings = load_settings(args.settings)
    solution = run_scheme(args.scheme, scenario, settings)
    export_solution(solution, scenario, args.out)
    bits = solution.final_binary_objective
    mbit = bits * scenario.bandwidth_B * scenario.slot_duration_delta / 1e6
    print(f"{solution.scheme}: {bits:.6f} bit/s/Hz summed over {scenario.N} slots "
          f"({mbit:.3f} Mbit), {solution.iterations_used} outer passes")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    spec = SweepSpec(
        param=args.param,
        values=parse_values(args.values),
        schemes=[s for s in args.schemes.split(",") if s.strip()],
        scenario_path=args.scenario,
        out_dir=args.out,
        settings=load_settings(args.settings),
    )
    load_scenario(spec.scenario_path)  # fail fast on a bad base scenario
    rows = run_sweep(spec)
    failed = [r for r in rows if r["status"] != "ok"]
    for r in rows:
        print(f"{r['scheme']:>17s} {r['param']}={r['value']:g}: {r['binary_objective']:.6f} ({r['status']})")
    return EXIT_INVALID if failed else EXIT_OK


def _cmd_validate(args) -> int:
    solution, embedded = load_solution(args.solution)
    if args.scenario:
        scenario = load_scenario(args.scenario)
    elif embedded is not None:
        embedded = {k: v for k, v in embedded.items() if k != "num_slots_N"}
        scenario = Scenario(**embedded)
    else:
        raise ScenarioError("no scenario embedded in the solution; pass --scenario")
    problems = validate_solution(solution, scenario)
    for p in problems:
        print(f"INVALID: {p}")
    if not problems:
        print("ok")
    return EXIT_INVALID if problems else EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    args = parser.parse_args(_glue_values(argv))
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"solve": _cmd_solve, "sweep": _cmd_sweep, "validate": _cmd_validate}[args.command]
    try:
        return handler(args)
    except OSError as exc:
        print(f"fduav: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ScenarioError, ValueError) as exc:
        print(f"fduav: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
