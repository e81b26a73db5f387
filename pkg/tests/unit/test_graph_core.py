from dataclasses import replace
from itertools import combinations

import networkx as nx
import pytest

from models.errors import DisconnectedNetworkError, InvalidNetworkError, NotAForestError
from models.models import CLOUD, EddInstance, EdgeServerNetwork
from services.graph_core import (
    all_pairs_shortest,
    approximation_bound,
    direct_solution,
    induce,
    minimum_spanning_tree,
    prune_to_destinations,
    solution_cost,
    solution_from_parents,
    validate_solution,
)
from tests.conftest import small_instance

NET9_PLAN = [(4, 1), (1, 2), (1, 5), (2, 3), (4, 8)]


def test_closure_distances_on_worked_example(net10):
    closure = all_pairs_shortest(net10.network)
    assert closure.distance(10, 9) == 1
    assert closure.distance(1, 9) == 13
    assert closure.distance(1, 4) == 10
    assert closure.distance(2, 4) == 5
    assert closure.distance(4, 4) == 0


def test_closure_paths_follow_real_edges(net10):
    closure = all_pairs_shortest(net10.network)
    assert closure.path(1, 9) == [1, 2, 4, 10, 9]
    assert closure.path_edges(1, 4) == [(1, 2, 5), (2, 4, 5)]
    assert closure.path(6, 6) == [6]


def test_next_hop_prefers_smallest_neighbour():
    # 1 -> 4 has two shortest routes, through 2 and through 3
    net = EdgeServerNetwork(node_count=4, edges=((1, 3, 1), (3, 4, 1), (1, 2, 1), (2, 4, 1)))
    closure = all_pairs_shortest(net)
    assert closure.path(1, 4) == [1, 2, 4]
    assert closure.path(4, 1) == [4, 2, 1]


def test_disconnected_network_is_rejected():
    net = EdgeServerNetwork(node_count=3, edges=((1, 2, 1),))
    with pytest.raises(DisconnectedNetworkError, match="disconnected"):
        all_pairs_shortest(net)


def test_induced_closure_on_two_destinations(net10):
    closure = all_pairs_shortest(net10.network)
    induced = induce(closure, [2, 1])
    assert list(induced.edges()) == [(1, 2, 5)]
    assert induced.edge_count == 1


def test_minimum_spanning_tree_over_closure(net10):
    closure = all_pairs_shortest(net10.network)
    tree, total = minimum_spanning_tree(net10.destinations, closure.distance)
    assert len(tree) == len(net10.destinations) - 1
    assert total == sum(w for _, _, w in tree)
    assert (1, 2, 5) in tree



def _brute_force_distance(graph: nx.Graph, u: int, v: int) -> int:
    return min(nx.path_weight(graph, path, "weight") for path in nx.all_simple_paths(graph, u, v))


def _brute_force_mst_weight(nodes, edges) -> int:
    best = None
    for subset in combinations(edges, len(nodes) - 1):
        tree = nx.Graph()
        tree.add_nodes_from(nodes)
        tree.add_weighted_edges_from(subset)
        if nx.is_tree(tree):
            weight = sum(w for _, _, w in subset)
            best = weight if best is None else min(best, weight)
    return best


@pytest.mark.parametrize("block", range(4))
def test_closure_is_a_metric_matching_path_enumeration(block):
    for seed in range(block * 50, (block + 1) * 50):
        network = small_instance(seed).network
        closure = all_pairs_shortest(network)
        graph = network.to_networkx()
        nodes = list(network.nodes)
        for u in nodes:
            assert closure.distance(u, u) == 0
            for v in nodes:
                assert closure.distance(u, v) == closure.distance(v, u)
                for x in nodes:
                    assert closure.distance(u, v) <= closure.distance(u, x) + closure.distance(x, v)
        for u, v in combinations(nodes, 2):
            assert closure.distance(u, v) == _brute_force_distance(graph, u, v), (seed, u, v)


def test_closure_path_walks_shortest_route(net10):
    closure = all_pairs_shortest(net10.network)
    graph = net10.network.to_networkx()
    assert closure.distance(1, 9) == _brute_force_distance(graph, 1, 9)
    for u, v in combinations(net10.network.nodes, 2):
        assert sum(w for _, _, w in closure.path_edges(u, v)) == closure.distance(u, v)


def test_minimum_spanning_tree_of_whole_worked_network(net10):
    network = net10.network
    tree, total = minimum_spanning_tree(network.nodes, network.edges)
    assert len(tree) == network.node_count - 1
    assert total == _brute_force_mst_weight(list(network.nodes), network.edges)


def test_minimum_spanning_tree_matches_exhaustive_search():
    for seed in range(200):
        network = small_instance(seed, max_nodes=7).network
        _, total = minimum_spanning_tree(network.nodes, network.edges)
        assert total == _brute_force_mst_weight(list(network.nodes), network.edges), seed


def test_induced_closure_on_three_nodes(net10):
    closure = all_pairs_shortest(net10.network)
    induced = induce(closure, {1, 2, 4})
    assert sorted(induced.edges()) == [(1, 2, 5), (1, 4, 10), (2, 4, 5)]


def test_induced_closure_on_every_node_is_complete(net10):
    closure = all_pairs_shortest(net10.network)
    induced = induce(closure, net10.network.nodes)
    n = net10.network.node_count
    assert induced.edge_count == n * (n - 1) // 2
    assert len(list(induced.edges())) == n * (n - 1) // 2

def test_minimum_spanning_tree_breaks_ties_by_ids():
    tree, total = minimum_spanning_tree([1, 2, 3], [(2, 3, 1), (1, 3, 1), (1, 2, 1)])
    assert tree == [(1, 2, 1), (1, 3, 1)]
    assert total == 2


def test_minimum_spanning_tree_needs_connected_input():
    with pytest.raises(DisconnectedNetworkError):
        minimum_spanning_tree([1, 2, 3], [(1, 2, 4)])


def test_depths_of_single_transit_plan(net9):
    sol = solution_cost(net9, [4], NET9_PLAN)
    assert dict(sol.depth) == {4: 100, 1: 101, 2: 103, 5: 110, 8: 110, 3: 110}
    assert sol.cost_c2e == 100
    assert sol.cost_e2e == 29
    assert sol.total_cost == 129
    assert validate_solution(net9, sol).ok


def test_solution_cost_rejects_two_parents(net10):
    with pytest.raises(NotAForestError, match="not a forest"):
        solution_cost(net10, [1], [(1, 2), (4, 2)])


def test_solution_cost_rejects_unknown_edge(net10):
    with pytest.raises(InvalidNetworkError):
        solution_cost(net10, [1], [(1, 9)])


def test_validate_reports_depth_overflow(net9):
    tight = net9.with_limits(l_limit=105)
    report = validate_solution(tight, solution_cost(tight, [4], NET9_PLAN))
    assert not report.ok
    assert "depth overflow at 3: 110 > 105" in report.violations
    assert "depth overflow at 5: 110 > 105" in report.violations
    assert "depth overflow at 8: 110 > 105" in report.violations
    assert not any("at 1:" in v for v in report.violations)


def test_validate_reports_uncovered_and_cost_mismatch(net10):
    sol = solution_cost(net10, [2], [(2, 1)])
    report = validate_solution(net10, sol)
    assert "uncovered destination 3" in report.violations
    forged = replace(direct_solution(net10), total_cost=1)
    report = validate_solution(net10, forged)
    assert any(v.startswith("cost mismatch: total") for v in report.violations)


def test_validate_reports_structural_faults(net10):
    base = direct_solution(net10)
    forged = replace(base, c2e=base.c2e | {11}, e2e=frozenset({(1, 9), (1, 2)}))
    report = validate_solution(net10, forged)
    assert "unknown transit node 11" in report.violations
    assert "unknown edge (1, 9)" in report.violations
    assert "multiple parents at 2" in report.violations


def test_validate_reports_cycles_as_unreachable(net10):
    forged = replace(direct_solution(net10), e2e=frozenset({(5, 8), (8, 5)}))
    report = validate_solution(net10, forged)
    assert "unreachable node 5" in report.violations


def test_direct_solution_costs_gamma_per_destination(net10):
    sol = direct_solution(net10)
    assert sol.total_cost == 700
    assert sol.c2e == net10.destinations
    assert validate_solution(net10, sol)


def test_prune_drops_branches_without_destinations():
    parents = {1: CLOUD, 2: 1, 3: 2, 4: 1, 5: CLOUD}
    assert prune_to_destinations(parents, [3]) == {1: CLOUD, 2: 1, 3: 2}


def test_solution_from_parents_roundtrips_plan(net9):
    sol = solution_cost(net9, [4], NET9_PLAN)
    rebuilt = solution_from_parents(net9, sol.parent_map())
    assert rebuilt == sol


def test_approximation_bound(net10):
    assert approximation_bound(net10) == pytest.approx(11 / 6 * (2 * 100 / 10 + 1))
    assert approximation_bound(net10.with_limits(l_limit=100)) is None


def test_single_node_instance():
    net = EdgeServerNetwork(node_count=1, edges=())
    inst = EddInstance(network=net, destinations=frozenset({1}), gamma=5, l_limit=5)
    assert all_pairs_shortest(net).distance(1, 1) == 0
    assert direct_solution(inst).total_cost == 5
