"""
Optimal edge data distribution via the 0-1 integer program.

``build_model`` emits the program in a normalized linear form (for export to
external solvers). ``solve_exact`` is an internal branch-and-bound over the
same decision space: it grows cloud-rooted forests one destination path at a
time and returns the optimum. ``brute_force_oracle`` enumerates parent choices
exhaustively and exists for cross-checking only.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import config
from models.errors import InfeasibleInstanceError, OracleLimitError
from models.models import CLOUD, EddInstance, EddSolution, MetricClosure
from services.graph_core import all_pairs_shortest, solution_from_parents

logger = logging.getLogger(__name__)

ORACLE_MAX_NODES = 8
_LP_TERMS_PER_LINE = 8


def tau_name(u: int, v: int) -> str:
    return f"t_{'c' if u == CLOUD else u}_{v}"


def h_name(v: int) -> str:
    return f"h_{'c' if v == CLOUD else v}"


def l_name(v: int) -> str:
    return f"l_{'c' if v == CLOUD else v}"


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: Tuple[Tuple[int, str], ...]
    sense: str
    rhs: int

    def evaluate(self, assignment: Mapping[str, float]) -> bool:
        lhs = sum(coef * assignment.get(var, 0) for coef, var in self.terms)
        if self.sense == "<=":
            return lhs <= self.rhs
        if self.sense == ">=":
            return lhs >= self.rhs
        return lhs == self.rhs


@dataclass(frozen=True)
class IpModel:
    tau: Tuple[str, ...]
    h: Tuple[str, ...]
    depth: Tuple[str, ...]
    objective: Tuple[Tuple[int, str], ...]
    constraints: Tuple[Constraint, ...]
    depth_upper: int
    big_m: int
    arcs: Mapping[str, Tuple[int, int, int]] = field(default_factory=dict)

    def objective_value(self, assignment: Mapping[str, float]) -> float:
        return sum(coef * assignment.get(var, 0) for coef, var in self.objective)

    def violated(self, assignment: Mapping[str, float]) -> List[str]:
        return [c.name for c in self.constraints if not c.evaluate(assignment)]

    def to_lp(self) -> str:
        lines = [f"\\ EDD model: big-M = {self.big_m}", "Minimize"]
        lines.extend(_wrap_terms(" obj:", self.objective))
        lines.append("Subject To")
        for c in self.constraints:
            body = _wrap_terms(f" {c.name}:", c.terms)
            body[-1] = f"{body[-1]} {'=' if c.sense == '=' else c.sense} {c.rhs}"
            lines.extend(body)
        lines.append("Bounds")
        for var in self.depth:
            if var == l_name(CLOUD):
                lines.append(f" {var} = 0")
            else:
                lines.append(f" 0 <= {var} <= {self.depth_upper}")
        lines.append("Binaries")
        lines.extend(_wrap_names(self.tau + self.h))
        lines.append("Generals")
        lines.extend(_wrap_names(self.depth))
        lines.append("End")
        return "\n".join(lines) + "\n"


def _format_term(coef: int, var: str, first: bool) -> str:
    sign = "-" if coef < 0 else "+"
    magnitude = abs(coef)
    text = var if magnitude == 1 else f"{magnitude} {var}"
    if first and coef > 0:
        return text
    return f"{sign} {text}"


def _wrap_terms(prefix: str, terms: Sequence[Tuple[int, str]]) -> List[str]:
    if not terms:
        return [f"{prefix} 0"]
    lines = []
    current = [prefix]
    for i, (coef, var) in enumerate(terms):
        current.append(_format_term(coef, var, i == 0))
        if len(current) > _LP_TERMS_PER_LINE:
            lines.append(" ".join(current))
            current = ["  "]
    if len(current) > 1:
        lines.append(" ".join(current))
    return lines


def _wrap_names(names: Sequence[str]) -> List[str]:
    return [" " + " ".join(names[i:i + _LP_TERMS_PER_LINE]) for i in range(0, len(names), _LP_TERMS_PER_LINE)]


def build_model(instance: EddInstance) -> IpModel:
    network = instance.network
    gamma = instance.gamma
    big_m = instance.l_limit + network.max_weight

    arcs: Dict[str, Tuple[int, int, int]] = {}
    for v in network.nodes:
        arcs[tau_name(CLOUD, v)] = (CLOUD, v, gamma)
    for u, v, w in network.edges:
        arcs[tau_name(u, v)] = (u, v, w)
        arcs[tau_name(v, u)] = (v, u, w)

    h_vars = (h_name(CLOUD),) + tuple(h_name(v) for v in network.nodes)
    l_vars = (l_name(CLOUD),) + tuple(l_name(v) for v in network.nodes)
    objective = tuple((w, name) for name, (_, _, w) in arcs.items())

    constraints: List[Constraint] = []
    for v in (CLOUD,) + instance.sorted_destinations:
        constraints.append(Constraint(f"visit_{h_name(v)}", ((1, h_name(v)),), "=", 1))
    for name, (u, v, _) in arcs.items():
        constraints.append(Constraint(f"tail_{name}", ((1, name), (-1, h_name(u))), "<=", 0))
        constraints.append(Constraint(f"head_{name}", ((1, name), (-1, h_name(v))), "<=", 0))
    incoming: Dict[int, List[str]] = {v: [] for v in network.nodes}
    for name, (_, v, _) in arcs.items():
        incoming[v].append(name)
    for v in network.nodes:
        terms = tuple((1, name) for name in incoming[v]) + ((-1, h_name(v)),)
        constraints.append(Constraint(f"parent_{v}", terms, "=", 0))
    cloud_terms = tuple((1, tau_name(CLOUD, v)) for v in network.nodes)
    constraints.append(Constraint("cloud_out", cloud_terms, ">=", 1))
    constraints.append(Constraint("cloud_depth", ((1, l_name(CLOUD)),), "=", 0))
    for name, (u, v, w) in arcs.items():
        # L_v - L_u = w whenever the arc is selected
        constraints.append(Constraint(f"dlo_{name}", ((1, l_name(v)), (-1, l_name(u)), (-big_m, name)), ">=", w - big_m))
        constraints.append(Constraint(f"dhi_{name}", ((1, l_name(v)), (-1, l_name(u)), (big_m, name)), "<=", w + big_m))

    return IpModel(
        tau=tuple(arcs),
        h=h_vars,
        depth=l_vars,
        objective=objective,
        constraints=tuple(constraints),
        depth_upper=instance.l_limit,
        big_m=big_m,
        arcs=arcs,
    )


def assignment_from_solution(instance: EddInstance, sol: EddSolution) -> Dict[str, int]:
    """Variable values encoding ``sol``; uncovered nodes get H = 0 and depth 0."""
    values: Dict[str, int] = {name: 0 for name in build_model(instance).tau}
    for v in sol.c2e:
        values[tau_name(CLOUD, v)] = 1
    for u, v in sol.e2e:
        values[tau_name(u, v)] = 1
    values[h_name(CLOUD)] = 1
    values[l_name(CLOUD)] = 0
    for v in instance.network.nodes:
        values[h_name(v)] = 1 if v in sol.depth else 0
        values[l_name(v)] = sol.depth.get(v, 0)
    return values


def export_lp(instance: EddInstance, path: str | Path) -> Path:
    target = Path(path)
    target.write_text(build_model(instance).to_lp(), encoding="utf-8")
    logger.info("LP model written to %s", target)
    return target


class _BranchAndBound:
    """
    Depth-first search over partial forests.

    Each branch covers the smallest uncovered destination with a path that
    leaves the partial forest (or the cloud) and runs through uncovered nodes
    only. Every plan without useless leaves is generated exactly once.
    """

    def __init__(self, instance: EddInstance, closure: MetricClosure, node_budget: int) -> None:
        self.instance = instance
        self.network = instance.network
        self.dist = closure.dist
        self.gamma = instance.gamma
        self.limit = instance.l_limit
        self.destinations = instance.sorted_destinations
        self.node_budget = node_budget
        self.nodes_expanded = 0
        self.exhausted = False
        # cheapest possible incoming arc per destination
        self.attach = {
            r: min([instance.gamma] + [w for _, w in self.network.adjacency[r]])
            for r in self.destinations
        }
        self.best_key: Optional[tuple] = None
        self.best_parents: Dict[int, int] = {}

    @property
    def best_cost(self) -> int:
        return self.best_key[0]

    def run(self) -> Tuple[Dict[int, int], bool]:
        direct = {r: CLOUD for r in self.destinations}
        self._offer(direct, {r: self.gamma for r in self.destinations}, self.gamma * len(self.destinations))
        self._search({}, {}, 0)
        return self.best_parents, not self.exhausted

    def _offer(self, parents: Dict[int, int], depth: Dict[int, int], cost: int) -> None:
        transits = tuple(sorted(v for v, p in parents.items() if p == CLOUD))
        arcs = tuple(sorted((p, v) for v, p in parents.items() if p != CLOUD))
        key = (cost, sum(depth[r] for r in self.destinations), transits, arcs)
        if self.best_key is None or key < self.best_key:
            if self.best_key is not None and cost < self.best_cost:
                logger.debug("incumbent improved to %d after %d nodes", cost, self.nodes_expanded)
            self.best_key = key
            self.best_parents = dict(parents)

    def _search(self, parents: Dict[int, int], depth: Dict[int, int], cost: int) -> None:
        if self.nodes_expanded >= self.node_budget:
            self.exhausted = True
            return
        self.nodes_expanded += 1
        uncovered = [r for r in self.destinations if r not in depth]
        if not uncovered:
            self._offer(parents, depth, cost)
            return
        if cost + sum(self.attach[r] for r in uncovered) > self.best_cost:
            return

        target = uncovered[0]
        for seg_cost, path in self._segments(target, depth, cost):
            start = path[0]
            level = 0 if start == CLOUD else depth[start]
            prev = start
            for v in path[1:]:
                level += self.gamma if prev == CLOUD else self.network.weight(prev, v)
                parents[v] = prev
                depth[v] = level
                prev = v
            self._search(parents, depth, cost + seg_cost)
            for v in path[1:]:
                del parents[v]
                del depth[v]
            if self.exhausted:
                return

    def _segments(self, target: int, depth: Dict[int, int], cost: int) -> List[Tuple[int, Tuple[int, ...]]]:
        """Paths from the cloud or a covered node through uncovered nodes to ``target``, cheapest first."""
        found: List[Tuple[int, Tuple[int, ...]]] = []
        dist = self.dist
        starts = [(CLOUD, 0)] + sorted(depth.items())

        for start, level in starts:
            path = [start]
            on_path = {start}

            def extend(node: int, node_level: int, seg: int) -> None:
                if node == CLOUD:
                    steps = [(x, self.gamma) for x in self.network.nodes]
                else:
                    steps = self.network.adjacency[node]
                for x, w in steps:
                    if x in depth or x in on_path:
                        continue
                    x_level = node_level + w
                    if x_level + dist[x, target] > self.limit:
                        continue
                    x_seg = seg + w
                    if cost + x_seg + dist[x, target] > self.best_cost:
                        continue
                    path.append(x)
                    on_path.add(x)
                    if x == target:
                        found.append((x_seg, tuple(path)))
                    else:
                        extend(x, x_level, x_seg)
                    path.pop()
                    on_path.discard(x)

            extend(start, level, 0)
        found.sort()
        return found


def solve_exact(instance: EddInstance, node_budget: Optional[int] = None,
                closure: Optional[MetricClosure] = None) -> EddSolution:
    """
    Optimal plan by branch-and-bound.

    Among equal-cost optima the plan with the smallest total destination depth
    wins, then the smallest sorted transit ids. When the node budget runs out the
    best plan found so far is returned with ``proven_optimal=False``.
    """
    if instance.l_limit < instance.gamma:
        raise InfeasibleInstanceError()
    budget = node_budget if node_budget is not None else config.settings.node_budget
    closure = closure if closure is not None else all_pairs_shortest(instance.network)
    search = _BranchAndBound(instance, closure, budget)
    parents, proven = search.run()
    solution = solution_from_parents(instance, parents).tagged("exact", proven_optimal=proven)
    if proven:
        logger.info("exact: optimum %d after %d nodes", solution.total_cost, search.nodes_expanded)
    else:
        logger.warning(
            "exact: node budget %d exhausted, best %d not proven optimal", budget, solution.total_cost
        )
    return solution


def brute_force_oracle(instance: EddInstance) -> int:
    """Minimum cost over every assignment of one parent (or none) per node; N <= 8 only."""
    network = instance.network
    n = network.node_count
    if n > ORACLE_MAX_NODES:
        raise OracleLimitError(f"brute-force oracle refuses N={n} (limit {ORACLE_MAX_NODES})")
    gamma = instance.gamma
    destinations = instance.destinations
    options: List[List[Tuple[Optional[int], int]]] = []
    for v in network.nodes:
        choices: List[Tuple[Optional[int], int]] = [] if v in destinations else [(None, 0)]
        choices.append((CLOUD, gamma))
        choices.extend(network.adjacency[v])
        options.append(choices)
    cheapest = {v: min(price for _, price in options[v - 1]) for v in destinations}
    best = gamma * len(destinations)
    assignment: List[Optional[int]] = [None] * (n + 1)

    def feasible() -> bool:
        for v in network.nodes:
            if assignment[v] is None:
                continue
            level = 0
            cur = v
            steps = 0
            while cur != CLOUD:
                p = assignment[cur]
                if p is None or steps > n:
                    return False
                level += gamma if p == CLOUD else network.weight(p, cur)
                cur = p
                steps += 1
            if level > instance.l_limit:
                return False
        return True

    def walk(v: int, cost: int) -> None:
        nonlocal best
        remaining = sum(cheapest[r] for r in destinations if r >= v)
        if cost + remaining >= best:
            return
        if v > n:
            if feasible():
                best = cost
            return
        for parent, price in options[v - 1]:
            assignment[v] = parent
            walk(v + 1, cost + price)
        assignment[v] = None

    walk(1, 0)
    return best
