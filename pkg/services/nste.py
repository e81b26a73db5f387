"""
EDD-NSTE: root an approximated Steiner tree at the cloud, then slice it against
the length limit and fine-tune the pieces into a feasible distribution plan.
"""

import logging
from collections import deque
from typing import Dict, Iterable, Optional, Set

from models.errors import EddError, InvariantViolationError
from models.models import CLOUD, EddInstance, EddSolution, MetricClosure, RootedDistributionTree, SteinerTree
from services.graph_core import all_pairs_shortest, prune_to_destinations, solution_from_parents
from services.steiner import approximate_steiner

logger = logging.getLogger(__name__)


def root_tree(st: SteinerTree, instance: EddInstance, candidates: Optional[Iterable[int]] = None) -> RootedDistributionTree:
    """Hang the tree from its best-connected node (ties: smallest id), which receives data from the cloud."""
    pool = set(st.vertices) if candidates is None else set(st.vertices) & set(candidates)
    if not pool:
        raise EddError("cannot root an empty Steiner tree")
    root = min(pool, key=lambda v: (-st.degree(v), v))

    network = instance.network
    for u, v, w in st.edges:
        if network.weight(u, v) != w:
            raise InvariantViolationError(f"tree edge ({u}, {v}) has weight {w}, network says {network.weight(u, v)}")

    parent = {root: CLOUD}
    path_length = {CLOUD: 0, root: instance.gamma}
    queue = deque([root])
    while queue:
        u = queue.popleft()
        for v, w in st.adjacency[u]:
            if v not in parent:
                parent[v] = u
                path_length[v] = path_length[u] + w
                queue.append(v)
    return RootedDistributionTree(root=root, parent=parent, path_length=path_length)


class _DistributionTree:
    """Mutable working copy of G_DT used while slicing."""

    def __init__(self, tree: RootedDistributionTree) -> None:
        self.parent: Dict[int, int] = dict(tree.parent)
        self.path_length: Dict[int, int] = dict(tree.path_length)
        self.children: Dict[int, Set[int]] = {CLOUD: set()}
        for v in self.parent:
            self.children.setdefault(v, set())
        for v, p in self.parent.items():
            self.children[p].add(v)

    def move(self, v: int, new_parent: int) -> None:
        self.children[self.parent[v]].discard(v)
        self.parent[v] = new_parent
        self.children[new_parent].add(v)

    def shift_subtree(self, v: int, delta: int) -> None:
        queue = deque([v])
        while queue:
            u = queue.popleft()
            self.path_length[u] += delta
            queue.extend(self.children[u])

    def refresh_depths(self, gamma: int, network) -> None:
        queue = deque()
        for v in self.children[CLOUD]:
            self.path_length[v] = gamma
            queue.append(v)
        while queue:
            u = queue.popleft()
            for v in self.children[u]:
                self.path_length[v] = self.path_length[u] + network.weight(u, v)
                queue.append(v)


def slice_and_finetune(tree: RootedDistributionTree, instance: EddInstance) -> EddSolution:
    network = instance.network
    limit = instance.l_limit
    dt = _DistributionTree(tree)
    visited: Set[int] = set()
    stack = sorted(dt.children[CLOUD], reverse=True)

    while stack:
        v = stack.pop()
        if v in visited:
            continue
        visited.add(v)
        if v in instance.destinations and dt.path_length[v] > limit:
            _reconnect(dt, v, instance)
        # ascending child order; a node moved under v after being pushed elsewhere is skipped via visited
        stack.extend(sorted((c for c in dt.children[v] if c not in visited), reverse=True))

    kept = prune_to_destinations(dt.parent, instance.destinations)
    solution = solution_from_parents(instance, kept)
    logger.debug("sliced plan: %d transits, cost %d", len(solution.c2e), solution.total_cost)
    return solution


def _reconnect(dt: _DistributionTree, v: int, instance: EddInstance) -> None:
    """Feed ``v`` straight from the cloud and pull its tree neighbours under it when that shortens them."""
    network = instance.network
    logger.debug("node %d at %d exceeds %d, reconnecting to cloud", v, dt.path_length[v], instance.l_limit)
    dt.move(v, CLOUD)
    dt.refresh_depths(instance.gamma, network)
    for u, w in network.adjacency[v]:
        if u not in dt.parent:
            continue
        candidate = dt.path_length[v] + w
        if candidate <= instance.l_limit and candidate < dt.path_length[u]:
            delta = candidate - dt.path_length[u]
            dt.move(u, v)
            dt.shift_subtree(u, delta)
    dt.refresh_depths(instance.gamma, network)


def edd_nste(instance: EddInstance, closure: Optional[MetricClosure] = None) -> EddSolution:
    closure = closure if closure is not None else all_pairs_shortest(instance.network)
    st = approximate_steiner(instance, closure)
    tree = root_tree(st, instance)
    solution = slice_and_finetune(tree, instance).tagged("nste")
    logger.info(
        "nste: steiner weight %d rooted at %d, total %d (c2e %d, e2e %d)",
        st.total_weight, tree.root, solution.total_cost, solution.cost_c2e, solution.cost_e2e,
    )
    return solution
