import logging

import pytest
from pydantic import ValidationError

from models.errors import EddError, InstanceFormatError, InvalidInstanceError
from models.models import GeneratorConfig
from services.data_io import (
    generate,
    load_edgelist,
    load_instance,
    load_preset,
    load_solution,
    load_stations,
    read_solution,
    read_stations,
    save_instance,
    save_solution,
)
from services.graph_core import validate_solution
from services.nste import edd_nste

FOUR_NODE_HEADER = """edd-instance 1
nodes 4
gamma 10
llimit 20
destinations 1 4
edges 3
"""


def _cfg(**overrides) -> GeneratorConfig:
    fields = dict(n=10, delta=1.4, rho=0.7, gamma=100, l_limit=150, seed=3)
    fields.update(overrides)
    return GeneratorConfig(**fields)


def test_generate_honours_densities():
    inst = generate(_cfg())
    assert len(inst.network.edges) == 14
    assert len(inst.destinations) == 7
    assert inst.network.is_connected
    assert all(1 <= w <= 50 for _, _, w in inst.network.edges)


def test_generate_tree_and_complete_graph():
    tree = generate(_cfg(delta=0.9))
    assert len(tree.network.edges) == 9
    assert tree.network.is_connected
    full = generate(_cfg(delta=4.5))
    assert len(full.network.edges) == 45


def test_generate_is_seed_deterministic():
    assert generate(_cfg(seed=42)) == generate(_cfg(seed=42))
    assert generate(_cfg(seed=42)).network != generate(_cfg(seed=43)).network


def test_generate_with_explicit_counts():
    inst = generate(_cfg(delta=None, edge_count=12, rho=None, destination_count=2, weight_min=3, weight_max=3))
    assert len(inst.network.edges) == 12
    assert len(inst.destinations) == 2
    assert {w for _, _, w in inst.network.edges} == {3}


def test_generate_needs_density():
    with pytest.raises(InvalidInstanceError, match="delta or edge_count"):
        generate(_cfg(delta=None))


def test_worked_example_fixture(net10):
    assert net10.node_count == 10
    assert len(net10.network.edges) == 14
    assert net10.destinations == {1, 2, 3, 4, 6, 7, 9}
    assert (net10.gamma, net10.l_limit) == (100, 110)


def test_instance_file_roundtrip(tmp_path):
    inst = generate(_cfg(seed=9))
    path = save_instance(inst, tmp_path / "gen.edd")
    assert load_instance(path) == inst
    assert path.read_text(encoding="ascii").startswith("edd-instance 1\nnodes 10\n")


def test_duplicate_edge_reports_line(tmp_path):
    path = tmp_path / "dup.edd"
    path.write_text(FOUR_NODE_HEADER + "1 2 3\n2 3 1\n3 2 4\n", encoding="ascii")
    with pytest.raises(InstanceFormatError, match="duplicate edge at line 9") as info:
        load_instance(path)
    assert info.value.line_number == 9


@pytest.mark.parametrize("body, message", [
    ("1 2 3\n2 3 x\n3 4 1\n", "unparsable token"),
    ("1 2 3\n2 3 1\n", "expected 3 edge lines"),
    ("1 2 3\n2 3 1\n3 4 0\n", "invalid edge"),
    ("1 2 3\n2 3 1\n1 3 1\n", "disconnected"),
])
def test_malformed_instance_files(tmp_path, body, message):
    path = tmp_path / "bad.edd"
    path.write_text(FOUR_NODE_HEADER + body, encoding="ascii")
    with pytest.raises(InstanceFormatError, match=message):
        load_instance(path)


def test_missing_header_is_rejected(tmp_path):
    path = tmp_path / "bad.edd"
    path.write_text("nodes 3\n", encoding="ascii")
    with pytest.raises(InstanceFormatError, match="missing header"):
        load_instance(path)


def test_solution_file_roundtrip(net10, tmp_path):
    sol = edd_nste(net10)
    path = save_solution(sol, tmp_path / "net10.sol", net10)
    text = path.read_text(encoding="ascii")
    assert text.startswith("total 228\nc2e 200\ne2e 28\nC 1\nC 9\n")
    assert "E 9 6 9" in text
    assert load_solution(net10, path) == sol.tagged("")
    assert validate_solution(net10, read_solution(path)).ok


def test_written_plan_fixture(net9, fixture_dir):
    written = read_solution(fixture_dir / "net9_plan.sol")
    assert written.total_cost == 129
    assert dict(written.depth)[3] == 110
    assert validate_solution(net9, written).ok


def test_solution_with_unknown_line(net10, tmp_path):
    path = tmp_path / "bad.sol"
    path.write_text("total 100\nX 1\n", encoding="ascii")
    with pytest.raises(InstanceFormatError, match="line 2"):
        read_solution(path)


def test_station_loader(fixture_dir):
    stations = read_stations(fixture_dir / "stations.csv")
    assert len(stations) == 12
    assert stations[0] == ("s01", -37.8136, 144.9631)
    inst = load_stations(fixture_dir / "stations.csv", _cfg())
    assert inst.node_count == 10
    assert inst.network.positions[1] == (-37.8136, 144.9631)
    assert inst.network.edges == generate(_cfg()).network.edges


def test_station_loader_sampling_is_seeded(fixture_dir):
    first = load_stations(fixture_dir / "stations.csv", _cfg(sample_stations=True))
    second = load_stations(fixture_dir / "stations.csv", _cfg(sample_stations=True))
    assert first.network.positions == second.network.positions


def test_station_loader_needs_enough_rows(fixture_dir):
    with pytest.raises(InvalidInstanceError, match="fewer than n=20"):
        load_stations(fixture_dir / "stations.csv", _cfg(n=20, delta=1.5))
    with pytest.raises(ValidationError):
        _cfg(n=0)


def test_headerless_station_csv(tmp_path):
    path = tmp_path / "plain.csv"
    path.write_text("a,1.5,2.5\nb,3.5,4.5\n", encoding="utf-8")
    assert read_stations(path) == [("a", 1.5, 2.5), ("b", 3.5, 4.5)]


def test_edgelist_triangle(fixture_dir):
    inst = load_edgelist(fixture_dir / "triangle.edges", _cfg(n=None, rho=None, destination_count=1))
    assert inst.node_count == 3
    assert len(inst.network.edges) == 3
    assert inst.network.weight(1, 2) == 7


def test_edgelist_drops_isolated_vertex_and_self_loops(tmp_path, caplog):
    path = tmp_path / "graph.edges"
    path.write_text("# sample\n10 20 4\n20 30\n30 30\n20 10 2\n99\n", encoding="utf-8")
    with caplog.at_level(logging.WARNING):
        inst = load_edgelist(path, _cfg(n=None, rho=None, destination_count=2))
    assert inst.node_count == 3
    assert inst.network.weight(1, 2) == 4
    messages = " ".join(r.getMessage() for r in caplog.records)
    assert "self-loop 30 dropped" in messages
    assert "repeated edge (20, 10) dropped" in messages
    assert "dropped 1 outside the largest component" in messages


def test_edgelist_bad_token_reports_line(tmp_path):
    path = tmp_path / "graph.edges"
    path.write_text("1 2\n2 three\n", encoding="utf-8")
    with pytest.raises(InstanceFormatError) as info:
        load_edgelist(path, _cfg(n=None, rho=None, destination_count=1))
    assert info.value.line_number == 2


def test_presets_ship_for_every_sweep():
    nodes_sweep = load_preset("sweep_nodes")
    assert nodes_sweep.param == "n"
    assert nodes_sweep.fixed["gamma"] == 500 and nodes_sweep.fixed["l_limit"] == 550
    assert load_preset("sweep_destinations").fixed["n"] == 100
    for name in ("nste_nodes", "nste_rho", "nste_llimit", "nste_delta"):
        assert load_preset(name).algorithms == ["nste"]
    with pytest.raises(EddError, match="no preset"):
        load_preset("no_such_sweep")


def test_non_ascii_instance_reports_line(tmp_path):
    path = tmp_path / "accent.edd"
    path.write_bytes(b"edd-instance 1\nnodes 2 # caf\xc3\xa9\ngamma 10\n")
    with pytest.raises(InstanceFormatError, match="not ascii text at line 2") as info:
        load_instance(path)
    assert info.value.line_number == 2


def test_undecodable_solution_and_edgelist_report_line(tmp_path):
    plan = tmp_path / "plan.sol"
    plan.write_bytes(b"total 10\nc2e 10\ne2e 0\nC \xff1\n")
    with pytest.raises(InstanceFormatError) as info:
        read_solution(plan)
    assert info.value.line_number == 4
    edges = tmp_path / "graph.edges"
    edges.write_bytes(b"1 2\n2 3 \xfe\n")
    with pytest.raises(InstanceFormatError, match="not utf-8 text") as info:
        load_edgelist(edges, _cfg(n=None, rho=None, destination_count=1))
    assert info.value.line_number == 2
