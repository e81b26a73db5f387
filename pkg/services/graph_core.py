"""
Graph core for edge data distribution: shortest paths, metric closure,
minimum spanning trees and feasibility/cost accounting shared by all solvers.
"""

import logging
from collections import deque
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Set, Tuple, Union

import numpy as np
from networkx.utils import UnionFind
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from models.errors import DisconnectedNetworkError, EddError, InvalidInstanceError, NotAForestError
from models.models import (
    CLOUD,
    Arc,
    Edge,
    EddInstance,
    EddSolution,
    EdgeServerNetwork,
    FeasibilityReport,
    InducedGraph,
    MetricClosure,
)

logger = logging.getLogger(__name__)

WeightSource = Union[Callable[[int, int], int], Iterable[Edge]]


def network_matrix(network: EdgeServerNetwork) -> csr_matrix:
    """Sparse symmetric adjacency matrix indexed by node id (row/column 0 is the unused cloud slot)."""
    size = network.node_count + 1
    if not network.edges:
        return csr_matrix((size, size), dtype=np.float64)
    edges = np.asarray(network.edges, dtype=np.int64)
    rows = np.concatenate([edges[:, 0], edges[:, 1]])
    cols = np.concatenate([edges[:, 1], edges[:, 0]])
    data = np.concatenate([edges[:, 2], edges[:, 2]]).astype(np.float64)
    return csr_matrix((data, (rows, cols)), shape=(size, size))


def all_pairs_shortest(network: EdgeServerNetwork) -> MetricClosure:
    """Metric closure of the edge-server graph with smallest-next-id path reconstruction."""
    raw = shortest_path(network_matrix(network), method="D", directed=False)
    block = raw[1:, 1:]
    if np.isinf(block).any():
        raise DisconnectedNetworkError()
    size = network.node_count + 1
    dist = np.zeros((size, size), dtype=np.int64)
    dist[1:, 1:] = block.astype(np.int64)

    next_hop = np.zeros((size, size), dtype=np.int64)
    for u in network.nodes:
        row = next_hop[u]
        # neighbours come in ascending id order, so the first match is the smallest id
        for x, w in network.adjacency[u]:
            match = (row == 0) & (dist[x] + w == dist[u])
            row[match] = x
        row[0] = 0
        row[u] = u
    logger.debug("metric closure built for %d nodes", network.node_count)
    return MetricClosure(dist=dist, next_hop=next_hop)


def _candidate_edges(vertices: Sequence[int], weights: WeightSource) -> List[Edge]:
    if callable(weights):
        ordered = sorted(vertices)
        return [
            (u, v, int(weights(u, v)))
            for i, u in enumerate(ordered)
            for v in ordered[i + 1:]
        ]
    members = set(vertices)
    return [
        (min(u, v), max(u, v), int(w))
        for u, v, w in weights
        if u in members and v in members
    ]


def minimum_spanning_tree(vertices: Iterable[int], weights: WeightSource) -> Tuple[List[Edge], int]:
    """
    Kruskal's algorithm with (weight, min id, max id) edge order.

    ``weights`` is either a symmetric lookup ``f(u, v)`` (complete graph on the
    vertices) or an explicit iterable of ``(u, v, w)`` edges.
    """
    vertex_list = sorted(set(vertices))
    if not vertex_list:
        raise EddError("minimum spanning tree of an empty vertex set")
    candidates = sorted(_candidate_edges(vertex_list, weights), key=lambda e: (e[2], e[0], e[1]))
    forest = UnionFind(vertex_list)
    tree: List[Edge] = []
    total = 0
    for u, v, w in candidates:
        if forest[u] != forest[v]:
            forest.union(u, v)
            tree.append((u, v, w))
            total += w
            if len(tree) == len(vertex_list) - 1:
                break
    if len(tree) != len(vertex_list) - 1:
        raise DisconnectedNetworkError()
    return tree, total


def induce(closure: MetricClosure, subset: Iterable[int]) -> InducedGraph:
    vertices = tuple(sorted(set(subset)))
    bad = [v for v in vertices if not 1 <= v <= closure.node_count]
    if bad:
        raise InvalidInstanceError(f"nodes outside 1..{closure.node_count}: {bad}")
    return InducedGraph(closure=closure, vertices=vertices)


def _depths_from_parents(parents: Dict[int, int], network: EdgeServerNetwork, gamma: int) -> Dict[int, int]:
    children: Dict[int, List[int]] = {}
    for v, p in parents.items():
        children.setdefault(p, []).append(v)
    depth: Dict[int, int] = {}
    queue = deque()
    for v in sorted(children.get(CLOUD, [])):
        depth[v] = gamma
        queue.append(v)
    while queue:
        u = queue.popleft()
        for v in sorted(children.get(u, [])):
            if v in depth:
                continue
            depth[v] = depth[u] + network.weight(u, v)
            queue.append(v)
    return depth


def solution_cost(instance: EddInstance, c2e: Iterable[int], e2e: Iterable[Arc]) -> EddSolution:
    """Price a candidate plan; depths come from a traversal out of the cloud, limits are not checked."""
    network = instance.network
    transits = frozenset(int(v) for v in c2e)
    arcs = frozenset((int(u), int(v)) for u, v in e2e)
    for v in transits:
        if not 1 <= v <= network.node_count:
            raise InvalidInstanceError(f"transit {v} outside 1..{network.node_count}")

    parents: Dict[int, int] = {v: CLOUD for v in transits}
    cost_e2e = 0
    for u, v in sorted(arcs):
        w = network.weight(u, v)
        if v in parents:
            raise NotAForestError(f"not a forest: node {v} has two parents")
        parents[v] = u
        cost_e2e += w

    depth = _depths_from_parents(parents, network, instance.gamma)
    cost_c2e = instance.gamma * len(transits)
    return EddSolution(
        c2e=transits,
        e2e=arcs,
        depth=depth,
        cost_c2e=cost_c2e,
        cost_e2e=cost_e2e,
        total_cost=cost_c2e + cost_e2e,
    )


def solution_from_parents(instance: EddInstance, parents: Dict[int, int]) -> EddSolution:
    c2e = [v for v, p in parents.items() if p == CLOUD]
    e2e = [(p, v) for v, p in parents.items() if p != CLOUD]
    return solution_cost(instance, c2e, e2e)


def prune_to_destinations(parents: Dict[int, int], destinations: Iterable[int]) -> Dict[int, int]:
    """Keep only nodes lying on a cloud-to-destination path."""
    keep: Set[int] = set()
    for r in destinations:
        v = r
        while v != CLOUD and v not in keep and v in parents:
            keep.add(v)
            v = parents[v]
    return {v: parents[v] for v in keep}


def validate_solution(instance: EddInstance, sol: EddSolution) -> FeasibilityReport:
    report = FeasibilityReport()
    network = instance.network

    incoming: Dict[int, int] = {}
    for v in sorted(sol.c2e):
        if not 1 <= v <= network.node_count:
            report.add(f"unknown transit node {v}")
            continue
        incoming[v] = incoming.get(v, 0) + 1
    e2e_cost = 0
    for u, v in sorted(sol.e2e):
        if not network.has_edge(u, v):
            report.add(f"unknown edge ({u}, {v})")
            continue
        e2e_cost += network.weight(u, v)
        incoming[v] = incoming.get(v, 0) + 1
    for v, count in sorted(incoming.items()):
        if count > 1:
            report.add(f"multiple parents at {v}")

    parents = {v: CLOUD for v in sol.c2e}
    for u, v in sol.e2e:
        parents.setdefault(v, u)
    for v in sorted(parents):
        seen = {v}
        cur = v
        while cur != CLOUD:
            cur = parents.get(cur, -1)
            if cur == -1 or cur in seen:
                report.add(f"unreachable node {v}")
                break
            seen.add(cur)

    for v in sorted(sol.c2e):
        if sol.depth.get(v) != instance.gamma:
            report.add(f"depth mismatch at transit {v}: {sol.depth.get(v)} != {instance.gamma}")
    for u, v in sorted(sol.e2e):
        if u in sol.depth and v in sol.depth and network.has_edge(u, v):
            expected = sol.depth[u] + network.weight(u, v)
            if sol.depth[v] != expected:
                report.add(f"depth mismatch at {v}: {sol.depth[v]} != {expected}")

    for r in instance.sorted_destinations:
        if r not in parents or r not in sol.depth:
            report.add(f"uncovered destination {r}")
        elif sol.depth[r] > instance.l_limit:
            report.add(f"depth overflow at {r}: {sol.depth[r]} > {instance.l_limit}")

    if sol.cost_c2e != instance.gamma * len(sol.c2e):
        report.add(f"cost mismatch: c2e {sol.cost_c2e} != {instance.gamma * len(sol.c2e)}")
    if sol.cost_e2e != e2e_cost:
        report.add(f"cost mismatch: e2e {sol.cost_e2e} != {e2e_cost}")
    if sol.total_cost != sol.cost_c2e + sol.cost_e2e:
        report.add(f"cost mismatch: total {sol.total_cost} != {sol.cost_c2e + sol.cost_e2e}")
    return report


def direct_solution(instance: EddInstance) -> EddSolution:
    """Every destination fed straight from the cloud; feasible whenever llimit >= gamma."""
    return solution_cost(instance, instance.destinations, ())


def approximation_bound(instance: EddInstance) -> Optional[float]:
    k = instance.slack
    if k <= 0:
        return None
    return (11.0 / 6.0) * (2.0 * instance.gamma / k + 1.0)
