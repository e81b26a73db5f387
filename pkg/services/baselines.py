"""
Comparison baselines: Greedy Connectivity, Random and EDD-A (hop-based,
bridged to length units by expanding every edge into unit hops).
"""

import logging
from collections import deque
from typing import Dict, List, Optional, Set

import numpy as np
from scipy.sparse.csgraph import shortest_path

from models.errors import DisconnectedNetworkError, InvariantViolationError
from models.models import CLOUD, EddInstance, EddSolution, EdgeServerNetwork, ExpandedHopGraph, MetricClosure, SteinerTree
from services.graph_core import (
    all_pairs_shortest,
    minimum_spanning_tree,
    network_matrix,
    prune_to_destinations,
    solution_from_parents,
)
from services.nste import root_tree, slice_and_finetune
from services.steiner import steiner_tree_from_edges

logger = logging.getLogger(__name__)


class _DistributionPlan:
    """Forest grown from chosen transits along shortest paths."""

    def __init__(self, instance: EddInstance, closure: MetricClosure) -> None:
        self.instance = instance
        self.closure = closure
        self.parent: Dict[int, int] = {}
        self.depth: Dict[int, int] = {}
        self.children: Dict[int, Set[int]] = {}

    def placed(self, v: int) -> bool:
        return v in self.parent

    def add_transit(self, v: int) -> None:
        self._set_parent(v, CLOUD)
        self.depth[v] = self.instance.gamma

    def attach(self, transit: int, target: int) -> None:
        """
        Walk the shortest path transit -> target. A node already in the plan keeps
        its parent unless this path reaches it strictly earlier.
        """
        for x, y, w in self.closure.path_edges(transit, target):
            reach = self.depth[x] + w
            if not self.placed(y):
                self._set_parent(y, x)
                self.depth[y] = reach
            elif reach < self.depth[y]:
                self._set_parent(y, x)
                self._shift_subtree(y, reach - self.depth[y])

    def _set_parent(self, v: int, p: int) -> None:
        old = self.parent.get(v)
        if old is not None:
            self.children[old].discard(v)
        self.parent[v] = p
        self.children.setdefault(p, set()).add(v)
        self.children.setdefault(v, set())

    def _shift_subtree(self, v: int, delta: int) -> None:
        queue = deque([v])
        while queue:
            u = queue.popleft()
            self.depth[u] += delta
            queue.extend(self.children[u])

    def served(self) -> Set[int]:
        return {r for r in self.instance.destinations if r in self.depth}

    def solution(self) -> EddSolution:
        kept = prune_to_destinations(self.parent, self.instance.destinations)
        return solution_from_parents(self.instance, kept)


def _serve_from(plan: _DistributionPlan, transit: int, targets: List[int]) -> None:
    plan.add_transit(transit)
    for r in targets:
        plan.attach(transit, r)


def greedy_connectivity(instance: EddInstance, seed: Optional[int] = None,
                        closure: Optional[MetricClosure] = None) -> EddSolution:
    """
    Repeatedly make the server reaching the most unserved destinations within
    K a transit (ties: smallest id). ``seed`` is accepted for a uniform solver
    signature; the algorithm is deterministic.
    """
    closure = closure if closure is not None else all_pairs_shortest(instance.network)
    slack = instance.slack
    plan = _DistributionPlan(instance, closure)
    unserved = set(instance.destinations)

    while unserved:
        pending = np.array(sorted(unserved), dtype=np.int64)
        best_v, best_count = None, 0
        for v in instance.network.nodes:
            if plan.placed(v):
                continue
            count = int(np.count_nonzero(closure.dist[v, pending] <= slack))
            if count > best_count:
                best_v, best_count = v, count
        targets = [int(r) for r in pending if closure.dist[best_v, r] <= slack]
        _serve_from(plan, best_v, targets)
        unserved -= plan.served()
        logger.debug("greedy picked %d serving %d destinations", best_v, best_count)

    solution = plan.solution().tagged("greedy")
    logger.info("greedy: %d transits, total %d", len(solution.c2e), solution.total_cost)
    return solution


def random_distribution(instance: EddInstance, seed: int = 0,
                        closure: Optional[MetricClosure] = None) -> EddSolution:
    """Transits drawn uniformly (PCG64) from servers not yet in the plan until every destination is served."""
    closure = closure if closure is not None else all_pairs_shortest(instance.network)
    rng = np.random.Generator(np.random.PCG64(seed))
    slack = instance.slack
    plan = _DistributionPlan(instance, closure)
    unserved = set(instance.destinations)
    rejected: Set[int] = set()

    while unserved:
        pool = [v for v in instance.network.nodes if not plan.placed(v) and v not in rejected]
        v = pool[int(rng.integers(len(pool)))]
        targets = [r for r in sorted(unserved) if closure.dist[v, r] <= slack]
        if not targets:
            rejected.add(v)
            continue
        _serve_from(plan, v, targets)
        unserved -= plan.served()

    solution = plan.solution().tagged("random")
    logger.info("random(seed=%d): %d transits, total %d", seed, len(solution.c2e), solution.total_cost)
    return solution


def expand_hops(network: EdgeServerNetwork) -> ExpandedHopGraph:
    """Replace every weight-w edge by a chain of w unit edges through w-1 temporary nodes."""
    next_id = network.node_count + 1
    edges = []
    chains = {}
    for u, v, w in network.edges:
        chain = [u] + list(range(next_id, next_id + w - 1)) + [v]
        next_id += w - 1
        edges.extend((a, b, 1) for a, b in zip(chain, chain[1:]))
        chains[(u, v)] = tuple(chain)
    expanded = EdgeServerNetwork(node_count=next_id - 1, edges=tuple(edges))
    return ExpandedHopGraph(network=expanded, original_node_count=network.node_count, chains=chains)


def connectivity_steiner_tree(instance: EddInstance) -> SteinerTree:
    """
    2-approximate Steiner tree: MST of the terminal closure, each closure edge
    expanded into a shortest path that prefers better-connected nodes on ties.
    """
    network = instance.network
    terminals = list(instance.sorted_destinations)
    if len(terminals) == 1:
        return SteinerTree(vertices=frozenset(terminals), edges=(), total_weight=0)
    rows = shortest_path(network_matrix(network), method="D", directed=False, indices=terminals)
    if np.isinf(rows[:, terminals]).any():
        raise DisconnectedNetworkError()
    row_of = {t: i for i, t in enumerate(terminals)}

    tree, _ = minimum_spanning_tree(terminals, lambda a, b: int(rows[row_of[a], b]))
    physical = {}
    for a, b, _ in tree:
        row = rows[row_of[a]]
        cur = b
        while cur != a:
            prev = min(
                (x for x, w in network.adjacency[cur] if row[x] + w == row[cur]),
                key=lambda x: (-network.degree(x), x),
            )
            key = (min(prev, cur), max(prev, cur))
            physical[key] = network.weight(prev, cur)
            cur = prev
    return steiner_tree_from_edges([(u, v, w) for (u, v), w in physical.items()], terminals)


def edd_a(instance: EddInstance) -> EddSolution:
    hop = expand_hops(instance.network)
    expanded = EddInstance(
        network=hop.network,
        destinations=instance.destinations,
        gamma=instance.gamma,
        l_limit=instance.l_limit,
    )
    st = connectivity_steiner_tree(expanded)
    tree = root_tree(st, expanded, candidates=instance.network.nodes)
    hop_plan = slice_and_finetune(tree, expanded)

    parents = hop_plan.parent_map()
    original: Dict[int, int] = {}
    for v, p in parents.items():
        if hop.is_temporary(v):
            continue
        while p != CLOUD and hop.is_temporary(p):
            p = parents[p]
        original[v] = p
    if any(hop.is_temporary(v) for v in hop_plan.c2e):
        raise InvariantViolationError("temporary node selected as transit")

    kept = prune_to_destinations(original, instance.destinations)
    solution = solution_from_parents(instance, kept).tagged("edd-a")
    logger.info(
        "edd-a: %d temporary nodes, %d transits, total %d",
        hop.temporary_count, len(solution.c2e), solution.total_cost,
    )
    return solution
