"""
Network Steiner tree approximation by triple loss contraction.

The terminal forest F starts as the metric closure induced on the destinations.
Each round takes the MST of F, derives pairwise ``save`` values from it and
accepts the triple whose Steiner centroid wins the most; contracting a triple
sets two of its closure edges to length 0 inside F.
"""

import logging
from collections import deque
from typing import Dict, Iterable, List, Optional, Sequence, Set

import numpy as np

from models.models import Edge, EddInstance, MetricClosure, SaveTable, SteinerTree, Triple, edge_key
from services.graph_core import minimum_spanning_tree

logger = logging.getLogger(__name__)


def find_save(tree: Sequence[Edge], terminals: Optional[Iterable[int]] = None) -> SaveTable:
    """
    Save values over an MST of the terminals.

    Removes the heaviest edge (ties: smallest ``(min id, max id)``), gives its
    weight to every pair split by the removal and recurses on both halves.
    """
    vertices = set(terminals or ())
    for u, v, _ in tree:
        vertices.update((u, v))
    ordered = tuple(sorted(vertices))
    index = {v: i for i, v in enumerate(ordered)}
    values = np.zeros((len(ordered), len(ordered)), dtype=np.int64)

    stack = [(set(ordered), [edge_key(u, v) + (w,) for u, v, w in tree])]
    while stack:
        component, edges = stack.pop()
        if not edges:
            continue
        heaviest = max(edges, key=lambda e: (e[2], -e[0], -e[1]))
        rest = [e for e in edges if e != heaviest]
        side = _reachable(heaviest[0], rest)
        other = component - side
        rows = [index[v] for v in side]
        cols = [index[v] for v in other]
        values[np.ix_(rows, cols)] = heaviest[2]
        values[np.ix_(cols, rows)] = heaviest[2]
        stack.append((side, [e for e in rest if e[0] in side]))
        stack.append((other, [e for e in rest if e[0] in other]))
    return SaveTable(terminals=ordered, values=values)


def _reachable(start: int, edges: Sequence[Edge]) -> Set[int]:
    adj: Dict[int, List[int]] = {}
    for u, v, _ in edges:
        adj.setdefault(u, []).append(v)
        adj.setdefault(v, []).append(u)
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in adj.get(u, ()):
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def enumerate_triples(instance: EddInstance, closure: MetricClosure) -> List[Triple]:
    """All 3-subsets of the destinations with their centroid among the non-destination servers."""
    terminals = instance.sorted_destinations
    if len(terminals) < 3:
        return []
    candidates = np.array([v for v in instance.network.nodes if v not in instance.destinations], dtype=np.int64)
    if candidates.size == 0:
        logger.debug("no non-destination servers, triples have no centroid")
        return []

    dist = closure.dist
    triples: List[Triple] = []
    for i, a in enumerate(terminals):
        for j in range(i + 1, len(terminals) - 1):
            b = terminals[j]
            thirds = terminals[j + 1:]
            sums = dist[a, candidates] + dist[b, candidates] + dist[np.ix_(thirds, candidates)]
            best = np.argmin(sums, axis=1)
            for row, (c, k) in enumerate(zip(thirds, best)):
                triples.append(Triple(members=(a, b, c), centroid=int(candidates[k]), d_z=int(sums[row, k])))
    return triples


def approximate_steiner(instance: EddInstance, closure: MetricClosure) -> SteinerTree:
    terminals = instance.sorted_destinations
    if len(terminals) == 1:
        return SteinerTree(vertices=frozenset(terminals), edges=(), total_weight=0)

    plain = _expand_closure_tree(closure, terminals, instance.destinations)
    triples = enumerate_triples(instance, closure)
    if not triples:
        return plain

    index = {t: i for i, t in enumerate(terminals)}
    forest = closure.dist[np.ix_(terminals, terminals)].copy()
    a_idx = np.array([index[z.members[0]] for z in triples])
    b_idx = np.array([index[z.members[1]] for z in triples])
    c_idx = np.array([index[z.members[2]] for z in triples])
    d_z = np.array([z.d_z for z in triples], dtype=np.int64)

    steiner_points: List[int] = []
    for _ in range(len(terminals) - 2):
        mst, _ = minimum_spanning_tree(terminals, lambda u, v: forest[index[u], index[v]])
        saves = find_save(mst, terminals).values
        pair_saves = np.stack([saves[a_idx, b_idx], saves[b_idx, c_idx], saves[a_idx, c_idx]])
        win = pair_saves.max(axis=0) + pair_saves.min(axis=0) - d_z
        # triples are generated in lexicographic order and argmax returns the first maximum
        best = int(np.argmax(win))
        if win[best] <= 0:
            break
        z = triples[best]
        ia, ib, ic = (index[m] for m in z.members)
        forest[ia, ib] = forest[ib, ia] = 0
        forest[ia, ic] = forest[ic, ia] = 0
        steiner_points.append(z.centroid)
        logger.debug("contracted triple %s via centroid %d (win %d)", z.members, z.centroid, int(win[best]))

    if not steiner_points:
        return plain
    contracted = _expand_closure_tree(closure, set(terminals) | set(steiner_points), instance.destinations)
    if contracted.total_weight > plain.total_weight:
        logger.debug("contracted tree %d heavier than plain %d", contracted.total_weight, plain.total_weight)
        return plain
    return contracted


def _expand_closure_tree(closure: MetricClosure, vertices: Iterable[int], terminals: Iterable[int]) -> SteinerTree:
    """MST of the closure on ``vertices`` expanded into real shortest paths, then pruned."""
    closure_tree, _ = minimum_spanning_tree(vertices, closure.distance)
    physical: Dict[tuple, int] = {}
    for u, v, _ in closure_tree:
        for a, b, w in closure.path_edges(u, v):
            physical[edge_key(a, b)] = w
    return steiner_tree_from_edges([(a, b, w) for (a, b), w in physical.items()], terminals)


def steiner_tree_from_edges(edges: Iterable[Edge], terminals: Iterable[int]) -> SteinerTree:
    """Spanning tree of the given edge union with non-terminal leaves pruned repeatedly."""
    edges = list(edges)
    keep = set(terminals)
    if not edges:
        return SteinerTree(vertices=frozenset(keep), edges=(), total_weight=0)
    vertices = {u for u, _, _ in edges} | {v for _, v, _ in edges} | keep
    tree, _ = minimum_spanning_tree(vertices, edges)
    remaining = prune_leaves(tree, keep)
    nodes = frozenset({u for u, _, _ in remaining} | {v for _, v, _ in remaining} | keep)
    return SteinerTree(vertices=nodes, edges=tuple(sorted(remaining)), total_weight=sum(w for _, _, w in remaining))


def prune_leaves(edges: Sequence[Edge], terminals: Set[int]) -> List[Edge]:
    degree: Dict[int, int] = {}
    incident: Dict[int, List[Edge]] = {}
    for e in edges:
        for v in e[:2]:
            degree[v] = degree.get(v, 0) + 1
            incident.setdefault(v, []).append(e)
    alive = set(edges)
    queue = deque(sorted(v for v, d in degree.items() if d == 1 and v not in terminals))
    while queue:
        v = queue.popleft()
        if degree[v] != 1:
            continue
        for e in incident[v]:
            if e in alive:
                alive.remove(e)
                degree[v] -= 1
                other = e[1] if e[0] == v else e[0]
                degree[other] -= 1
                if degree[other] == 1 and other not in terminals:
                    queue.append(other)
                break
    return sorted(alive)
