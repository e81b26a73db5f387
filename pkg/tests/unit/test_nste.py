import pytest

from models.models import CLOUD, EddInstance, EdgeServerNetwork, RootedDistributionTree, SteinerTree
from services.graph_core import all_pairs_shortest, validate_solution
from services.nste import edd_nste, root_tree, slice_and_finetune
from services.steiner import approximate_steiner
from tests.conftest import random_instance


def test_root_is_best_connected_smallest_id(net10):
    st = approximate_steiner(net10, all_pairs_shortest(net10.network))
    tree = root_tree(st, net10)
    assert tree.root == 1
    assert tree.parent[1] == CLOUD
    assert tree.path_length[1] == 100
    assert tree.path_length[9] == 113
    assert tree.path_length[6] == 112


def test_root_candidates_restrict_choice(net10):
    st = approximate_steiner(net10, all_pairs_shortest(net10.network))
    assert root_tree(st, net10, candidates=[4, 7]).root == 4


def test_worked_example_plan(net10):
    sol = edd_nste(net10)
    assert sol.total_cost == 228
    assert sol.c2e == {1, 9}
    assert sol.e2e == {(1, 2), (2, 4), (1, 3), (3, 7), (9, 6)}
    assert sol.algorithm == "nste"
    assert sol.proven_optimal is None
    assert validate_solution(net10, sol).ok


def test_slicing_reconnects_deep_destination():
    # chain 1 - 2 - 3 with a limit that only reaches node 2
    net = EdgeServerNetwork(node_count=3, edges=((1, 2, 4), (2, 3, 4)))
    inst = EddInstance(network=net, destinations=frozenset({1, 3}), gamma=10, l_limit=16)
    st = SteinerTree(vertices=frozenset({1, 2, 3}), edges=((1, 2, 4), (2, 3, 4)), total_weight=8)
    tree = RootedDistributionTree(root=1, parent={1: CLOUD, 2: 1, 3: 2}, path_length={CLOUD: 0, 1: 10, 2: 14, 3: 18})
    sol = slice_and_finetune(tree, inst)
    assert sol.c2e == {1, 3}
    assert sol.e2e == frozenset()
    assert sol.total_cost == 20
    assert validate_solution(inst, sol).ok
    assert root_tree(st, inst).root == 2


def test_reconnection_pulls_closer_neighbours(net10):
    sol = edd_nste(net10)
    # 6 sits under the reconnected 9 rather than under 7
    assert sol.parent_map()[6] == 9
    assert sol.depth[6] == 109


def test_zero_slack_sends_everything_direct(net10):
    inst = net10.with_limits(l_limit=net10.gamma)
    sol = edd_nste(inst)
    assert sol.c2e == inst.destinations
    assert sol.total_cost == inst.gamma * len(inst.destinations)


def test_single_destination(net10):
    inst = EddInstance(network=net10.network, destinations=frozenset({6}), gamma=100, l_limit=110)
    sol = edd_nste(inst)
    assert sol.c2e == {6}
    assert sol.total_cost == 100


@pytest.mark.parametrize("seed", range(30))
def test_plans_are_feasible_on_random_instances(seed):
    inst = random_instance(seed, n=20, delta=1.0 + (seed % 5) * 0.5, rho=0.35, slack=15 + seed * 3)
    sol = edd_nste(inst)
    report = validate_solution(inst, sol)
    assert report.ok, report.violations
    assert sol.total_cost <= inst.gamma * len(inst.destinations) + sum(w for _, _, w in inst.network.edges)


def _feeds_a_destination(parents, start, destinations) -> bool:
    for r in destinations:
        v = r
        while v != CLOUD:
            if v == start:
                return True
            v = parents[v]
    return False


@pytest.mark.parametrize("seed", range(30))
def test_every_kept_link_serves_a_destination(seed):
    inst = random_instance(seed, n=16, delta=1.0 + (seed % 5) * 0.4, slack=10 + 3 * seed, weight_max=20)
    sol = edd_nste(inst)
    parents = sol.parent_map()
    # dropping the link into v strands v's subtree, which must hold a destination
    for v in parents:
        assert _feeds_a_destination(parents, v, inst.destinations), (seed, v)
