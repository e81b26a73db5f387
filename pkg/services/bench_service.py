"""
Parameter sweeps: paired instances per sweep point, every requested algorithm
run on each, tidy CSV rows plus per-point means and per-algorithm trend slopes.
"""

import csv
import logging
import time
from dataclasses import astuple, dataclass, fields
from typing import Callable, Dict, List, Optional, TextIO

import numpy as np

import config
from models.errors import InvariantViolationError
from models.models import EddInstance, EddSolution, GeneratorConfig, MetricClosure, SweepSpec
from services.async_jobs import SweepExecutor
from services.baselines import edd_a, greedy_connectivity, random_distribution
from services.data_io import generate, load_edgelist, load_stations
from services.exact import solve_exact
from services.graph_core import all_pairs_shortest, validate_solution
from services.nste import edd_nste

logger = logging.getLogger(__name__)

Solver = Callable[[EddInstance, int, MetricClosure], EddSolution]

SOLVERS: Dict[str, Solver] = {
    "exact": lambda instance, seed, closure: solve_exact(instance, closure=closure),
    "nste": lambda instance, seed, closure: edd_nste(instance, closure=closure),
    "edd-a": lambda instance, seed, closure: edd_a(instance),
    "greedy": lambda instance, seed, closure: greedy_connectivity(instance, closure=closure),
    "random": lambda instance, seed, closure: random_distribution(instance, seed=seed, closure=closure),
}


def run_solver(algo: str, instance: EddInstance, seed: int, closure: Optional[MetricClosure] = None) -> EddSolution:
    closure = closure if closure is not None else all_pairs_shortest(instance.network)
    return SOLVERS[algo](instance, seed, closure)


@dataclass(frozen=True)
class BenchRow:
    param: str
    value: str
    rep: str
    seed: str
    algo: str
    total_cost: str
    c2e_cost: str
    e2e_cost: str
    runtime_s: str
    feasible: str


CSV_COLUMNS = [f.name for f in fields(BenchRow)]


def _fmt(value: float) -> str:
    return f"{value:.4f}"


class BenchService:
    def __init__(self, spec: SweepSpec, exact_cap: Optional[int] = None) -> None:
        self.spec = spec
        self.exact_cap = exact_cap if exact_cap is not None else config.settings.exact_cap

    def build_instance(self, cfg: GeneratorConfig) -> EddInstance:
        topology = self.spec.topology
        if topology.kind == "eua":
            return load_stations(topology.path, cfg)
        if topology.kind == "edgelist":
            return load_edgelist(topology.path, cfg)
        return generate(cfg)

    def run_point(self, point_index: int) -> List[BenchRow]:
        """All repetitions of one sweep point; every algorithm sees the same instance per repetition."""
        spec = self.spec
        value = spec.values[point_index]
        label = spec.format_value(value)
        rows: List[BenchRow] = []
        for rep in range(spec.repetitions):
            seed = spec.point_seed(point_index, rep)
            instance = self.build_instance(spec.point_config(value, seed))
            closure = all_pairs_shortest(instance.network)
            for algo in spec.algorithms:
                if algo == "exact" and instance.node_count > self.exact_cap:
                    rows.append(BenchRow(spec.param, label, str(rep), str(seed), algo, "", "", "", "", "skipped"))
                    continue
                started = time.perf_counter()
                solution = run_solver(algo, instance, seed, closure)
                elapsed = time.perf_counter() - started
                report = validate_solution(instance, solution)
                if not report.ok:
                    raise InvariantViolationError(
                        f"{algo} produced an invalid plan at {spec.param}={label} rep {rep}: "
                        + "; ".join(report.violations)
                    )
                # node budget ran out: feasible but not proven optimal
                status = "unproven" if solution.proven_optimal is False else "true"
                rows.append(BenchRow(
                    spec.param, label, str(rep), str(seed), algo,
                    str(solution.total_cost), str(solution.cost_c2e), str(solution.cost_e2e),
                    f"{elapsed:.6f}", status,
                ))
        logger.info("sweep %s: %s=%s done (%d rows)", spec.name, spec.param, label, len(rows))
        return rows

    def run(self, workers: Optional[int] = None) -> List[BenchRow]:
        with SweepExecutor(workers) as executor:
            per_point = executor.map_ordered(self.run_point, range(len(self.spec.values)))
        rows = [row for point_rows in per_point for row in point_rows]
        return rows + self.summary_rows(rows)

    def summary_rows(self, rows: List[BenchRow]) -> List[BenchRow]:
        spec = self.spec
        means: List[BenchRow] = []
        curves: Dict[str, List[tuple]] = {algo: [] for algo in spec.algorithms}
        for value in spec.values:
            label = spec.format_value(value)
            for algo in spec.algorithms:
                ran = [r for r in rows if r.value == label and r.algo == algo and r.feasible == "true"]
                if not ran:
                    means.append(BenchRow(spec.param, label, "mean", "", algo, "", "", "", "", "skipped"))
                    continue
                total = float(np.mean([int(r.total_cost) for r in ran]))
                means.append(BenchRow(
                    spec.param, label, "mean", "", algo, _fmt(total),
                    _fmt(float(np.mean([int(r.c2e_cost) for r in ran]))),
                    _fmt(float(np.mean([int(r.e2e_cost) for r in ran]))),
                    f"{float(np.mean([float(r.runtime_s) for r in ran])):.6f}", "true",
                ))
                curves[algo].append((float(value), total))

        trends: List[BenchRow] = []
        for algo in spec.algorithms:
            points = curves[algo]
            if len(points) < 2:
                continue
            xs, ys = zip(*points)
            slope = float(np.polyfit(xs, ys, 1)[0])
            trends.append(BenchRow(spec.param, "all", "trend", "", algo, f"{slope:.6f}", "", "", "", "true"))
        return means + trends


def trend_slopes(rows: List[BenchRow]) -> Dict[str, float]:
    return {r.algo: float(r.total_cost) for r in rows if r.rep == "trend"}


def mean_costs(rows: List[BenchRow], algo: str) -> List[float]:
    return [float(r.total_cost) for r in rows if r.rep == "mean" and r.algo == algo and r.feasible == "true"]


def write_csv(rows: List[BenchRow], handle: TextIO) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(astuple(row))


def run_sweep(spec: SweepSpec, handle: Optional[TextIO] = None, workers: Optional[int] = None) -> List[BenchRow]:
    rows = BenchService(spec).run(workers)
    if handle is not None:
        write_csv(rows, handle)
    return rows
