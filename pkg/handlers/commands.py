"""
Command handlers behind the ``edd`` CLI. Each takes the parsed argparse
namespace and returns a process exit code; exceptions are mapped to exit
codes by ``main.run``.
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List

import config
from models.errors import EddError, InvariantViolationError
from models.models import ALGORITHMS, GeneratorConfig, SweepSpec, TopologySource
from services.bench_service import run_solver, run_sweep
from services.data_io import (
    generate,
    instance_summary,
    load_edgelist,
    load_instance,
    load_preset,
    load_stations,
    read_solution,
    save_instance,
    save_solution,
)
from services.exact import export_lp
from services.graph_core import validate_solution
from utils.helpers import format_report, format_solution, solution_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USER_ERROR = 2
EXIT_INVARIANT = 3

# generator flag -> GeneratorConfig field
_GENERATOR_FLAGS = {
    "nodes": "n",
    "delta": "delta",
    "edges": "edge_count",
    "rho": "rho",
    "dest": "destination_count",
    "gamma": "gamma",
    "llimit": "l_limit",
    "wmin": "weight_min",
    "wmax": "weight_max",
}


def _generator_fields(args: argparse.Namespace) -> Dict[str, Any]:
    return {
        field: getattr(args, flag)
        for flag, field in _GENERATOR_FLAGS.items()
        if getattr(args, flag, None) is not None
    }


def _seed(args: argparse.Namespace) -> int:
    return args.seed if getattr(args, "seed", None) is not None else config.settings.default_seed


def cmd_solve(args: argparse.Namespace) -> int:
    """Run one algorithm on one instance file."""
    instance = load_instance(args.instance)
    started = time.perf_counter()
    solution = run_solver(args.algo, instance, _seed(args))
    elapsed = time.perf_counter() - started

    report = validate_solution(instance, solution)
    if not report.ok:
        raise InvariantViolationError(f"{args.algo} produced an invalid plan: " + "; ".join(report.violations))
    if args.out:
        save_solution(solution, args.out, instance)
        logger.info("solution written to %s", args.out)

    if args.json:
        print(solution_json(instance, solution, elapsed))
    else:
        print(format_solution(solution, elapsed))
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    cfg = GeneratorConfig(seed=_seed(args), **_generator_fields(args))
    if args.eua:
        instance = load_stations(args.eua, cfg)
    elif args.edgelist:
        instance = load_edgelist(args.edgelist, cfg)
    else:
        instance = generate(cfg)
    save_instance(instance, args.out)
    print(f"{args.out}: {instance_summary(instance)}")
    return EXIT_OK


def _parse_values(raw: str) -> List[float]:
    try:
        return [float(v) for v in raw.split(",") if v.strip()]
    except ValueError:
        raise EddError(f"--values expects comma-separated numbers, got {raw!r}") from None


def _sweep_from_args(args: argparse.Namespace) -> SweepSpec:
    if args.preset:
        spec = load_preset(args.preset)
        overrides: Dict[str, Any] = {}
        if args.reps is not None:
            overrides["repetitions"] = args.reps
        if args.seed is not None:
            overrides["base_seed"] = args.seed
        if args.algos:
            overrides["algorithms"] = args.algos.split(",")
        return SweepSpec(**{**spec.dict(), **overrides}) if overrides else spec

    if not args.param or not args.values:
        raise EddError("bench needs --preset or both --param and --values")
    topology = TopologySource()
    if args.eua:
        topology = TopologySource(kind="eua", path=args.eua)
    elif args.edgelist:
        topology = TopologySource(kind="edgelist", path=args.edgelist)
    fields: Dict[str, Any] = {
        "param": args.param,
        "values": _parse_values(args.values),
        "fixed": _generator_fields(args),
        "repetitions": args.reps or 1,
        "base_seed": _seed(args),
        "topology": topology,
    }
    if args.algos:
        fields["algorithms"] = args.algos.split(",")
    return SweepSpec(**fields)


def cmd_bench(args: argparse.Namespace) -> int:
    spec = _sweep_from_args(args)
    logger.info("sweep %s over %s=%s, algorithms %s", spec.name, spec.param, spec.values, ",".join(spec.algorithms))
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        with open(args.out, "w", newline="", encoding="utf-8") as handle:
            rows = run_sweep(spec, handle, workers=args.workers)
        logger.info("%d rows written to %s", len(rows), args.out)
    else:
        run_sweep(spec, sys.stdout, workers=args.workers)
    return EXIT_OK


def cmd_export_lp(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    path = export_lp(instance, args.out)
    print(f"{path}: LP model for {instance_summary(instance)}")
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    solution = read_solution(args.solution)
    report = validate_solution(instance, solution)
    print(format_report(report))
    return EXIT_OK if report.ok else EXIT_INVARIANT


def _add_generator_flags(parser: argparse.ArgumentParser, llimit_required: bool) -> None:
    parser.add_argument("--nodes", type=int)
    density = parser.add_mutually_exclusive_group()
    density.add_argument("--delta", type=float)
    density.add_argument("--edges", type=int)
    destinations = parser.add_mutually_exclusive_group()
    destinations.add_argument("--rho", type=float)
    destinations.add_argument("--dest", type=int)
    parser.add_argument("--gamma", type=int)
    parser.add_argument("--llimit", type=int, required=llimit_required)
    parser.add_argument("--wmin", type=int)
    parser.add_argument("--wmax", type=int)
    source = parser.add_mutually_exclusive_group()
    source.add_argument("--eua", help="base-station CSV used as the node set")
    source.add_argument("--edgelist", help="edge-list file used as the topology")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edd", description="Edge data distribution planner")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve one instance")
    solve.add_argument("--algo", required=True, choices=ALGORITHMS)
    solve.add_argument("--instance", required=True)
    solve.add_argument("--seed", type=int)
    solve.add_argument("--out")
    solve.add_argument("--json", action="store_true")
    solve.set_defaults(handler=cmd_solve)

    gen = sub.add_parser("gen", help="generate an instance file")
    _add_generator_flags(gen, llimit_required=True)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--out", required=True)
    gen.set_defaults(handler=cmd_gen)

    bench = sub.add_parser("bench", help="run a parameter sweep and emit CSV")
    bench.add_argument("--preset")
    bench.add_argument("--param")
    bench.add_argument("--values")
    bench.add_argument("--algos")
    bench.add_argument("--reps", type=int)
    _add_generator_flags(bench, llimit_required=False)
    bench.add_argument("--seed", type=int)
    bench.add_argument("--workers", type=int)
    bench.add_argument("--out")
    bench.set_defaults(handler=cmd_bench)

    lp = sub.add_parser("export-lp", help="write the integer program as LP text")
    lp.add_argument("--instance", required=True)
    lp.add_argument("--out", required=True)
    lp.set_defaults(handler=cmd_export_lp)

    check = sub.add_parser("validate", help="check a solution file against an instance")
    check.add_argument("--instance", required=True)
    check.add_argument("--solution", required=True)
    check.set_defaults(handler=cmd_validate)
    return parser
