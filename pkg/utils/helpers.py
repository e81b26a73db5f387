import json
from typing import Any, Dict, Optional

from models.models import EddInstance, EddSolution, FeasibilityReport
from services.graph_core import approximation_bound


def format_edges(solution: EddSolution) -> str:
    return " ".join(f"{u}->{v}" for u, v in solution.sorted_edges()) or "-"


def format_solution(solution: EddSolution, runtime_s: float) -> str:
    """Plain-text solve summary, one fact per line."""
    lines = [
        f"algo {solution.algorithm}",
        f"total {solution.total_cost}",
        f"c2e {solution.cost_c2e}",
        f"e2e {solution.cost_e2e}",
        "transits " + (" ".join(str(v) for v in sorted(solution.c2e)) or "-"),
        f"edges {format_edges(solution)}",
        f"time {runtime_s:.3f}s",
    ]
    if solution.proven_optimal is False:
        lines.append("note node budget exhausted, optimality not proven")
    return "\n".join(lines)


def solution_payload(instance: EddInstance, solution: EddSolution, runtime_s: float) -> Dict[str, Any]:
    bound: Optional[float] = approximation_bound(instance) if solution.algorithm == "nste" else None
    return {
        "algo": solution.algorithm,
        "total": solution.total_cost,
        "c2e": solution.cost_c2e,
        "e2e": solution.cost_e2e,
        "transits": sorted(solution.c2e),
        "edges": [list(e) for e in solution.sorted_edges()],
        "runtime_s": round(runtime_s, 6),
        "proven_optimal": solution.proven_optimal,
        "approximation_bound": bound,
    }


def solution_json(instance: EddInstance, solution: EddSolution, runtime_s: float) -> str:
    return json.dumps(solution_payload(instance, solution, runtime_s), sort_keys=True)


def format_report(report: FeasibilityReport) -> str:
    if report.ok:
        return "feasible"
    return "infeasible\n" + "\n".join(f"  - {v}" for v in report.violations)
