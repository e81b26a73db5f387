"""
Instance and solution files, dataset loaders (base-station CSV, edge lists) and
the seeded random instance generator.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

import config
from models.errors import EddError, InstanceFormatError, InvalidInstanceError, InvalidNetworkError
from models.models import EddInstance, EddSolution, EdgeServerNetwork, GeneratorConfig, SweepSpec, edge_key
from services.graph_core import solution_cost

logger = logging.getLogger(__name__)

FORMAT_HEADER = "edd-instance 1"


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def random_connected_edges(n: int, edge_count: int, rng: np.random.Generator) -> List[Tuple[int, int]]:
    """Random spanning tree by permutation attachment, topped up with distinct random non-edges."""
    order = rng.permutation(n) + 1
    pairs = set()
    for i in range(1, n):
        anchor = int(order[int(rng.integers(i))])
        pairs.add(edge_key(int(order[i]), anchor))
    extra = edge_count - len(pairs)
    if extra > 0:
        free = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1) if (u, v) not in pairs]
        chosen = rng.choice(len(free), size=extra, replace=False)
        pairs.update(free[int(i)] for i in chosen)
    return sorted(pairs)


def _sample_destinations(n: int, k: int, rng: np.random.Generator) -> List[int]:
    return sorted(int(v) + 1 for v in rng.choice(n, size=k, replace=False))


def generate(cfg: GeneratorConfig) -> EddInstance:
    if cfg.n is None:
        raise EddError("generator needs a node count")
    try:
        m = cfg.target_edge_count()
        k = cfg.target_destination_count()
    except ValueError as exc:
        raise InvalidInstanceError(str(exc)) from exc
    rng = _rng(cfg.seed)
    pairs = random_connected_edges(cfg.n, m, rng)
    weights = rng.integers(cfg.weight_min, cfg.weight_max + 1, size=len(pairs))
    edges = tuple((u, v, int(w)) for (u, v), w in zip(pairs, weights))
    destinations = _sample_destinations(cfg.n, k, rng)
    network = EdgeServerNetwork(node_count=cfg.n, edges=edges)
    logger.debug("generated n=%d m=%d |R|=%d seed=%d", cfg.n, m, k, cfg.seed)
    return EddInstance(network=network, destinations=frozenset(destinations), gamma=cfg.gamma, l_limit=cfg.l_limit)


def _read_lines(path: str | Path, encoding: str) -> List[str]:
    lines = []
    for line_number, raw in enumerate(Path(path).read_bytes().splitlines(), start=1):
        try:
            lines.append(raw.decode(encoding))
        except UnicodeDecodeError:
            raise InstanceFormatError(f"line is not {encoding} text", line_number) from None
    return lines


def _strip(line: str) -> str:
    return line.split("#", 1)[0].strip()


def _ints(tokens: List[str], line_number: int) -> List[int]:
    try:
        return [int(t) for t in tokens]
    except ValueError:
        raise InstanceFormatError(f"unparsable token in {' '.join(tokens)!r}", line_number) from None


def save_instance(instance: EddInstance, path: str | Path) -> Path:
    network = instance.network
    lines = [
        FORMAT_HEADER,
        f"nodes {network.node_count}",
        f"gamma {instance.gamma}",
        f"llimit {instance.l_limit}",
        "destinations " + " ".join(str(r) for r in instance.sorted_destinations),
        f"edges {len(network.edges)}",
    ]
    lines.extend(f"{u} {v} {w}" for u, v, w in network.edges)
    target = Path(path)
    target.write_text("\n".join(lines) + "\n", encoding="ascii")
    return target


def load_instance(path: str | Path) -> EddInstance:
    rows = [(i, _strip(raw)) for i, raw in enumerate(_read_lines(path, "ascii"), start=1)]
    rows = [(i, line) for i, line in rows if line]
    if not rows or rows[0][1] != FORMAT_HEADER:
        raise InstanceFormatError(f"missing header {FORMAT_HEADER!r}", rows[0][0] if rows else 1)

    header: Dict[str, List[int]] = {}
    cursor = 1
    for key in ("nodes", "gamma", "llimit", "destinations", "edges"):
        if cursor >= len(rows):
            raise InstanceFormatError(f"missing {key!r} line", rows[-1][0])
        line_number, line = rows[cursor]
        tokens = line.split()
        if tokens[0] != key:
            raise InstanceFormatError(f"expected {key!r}, found {tokens[0]!r}", line_number)
        values = _ints(tokens[1:], line_number)
        if key != "destinations" and len(values) != 1:
            raise InstanceFormatError(f"{key!r} takes one integer", line_number)
        header[key] = values
        cursor += 1

    expected = header["edges"][0]
    edge_rows = rows[cursor:]
    if len(edge_rows) != expected:
        raise InstanceFormatError(f"expected {expected} edge lines, found {len(edge_rows)}", rows[-1][0])
    n = header["nodes"][0]
    seen = set()
    edges = []
    for line_number, line in edge_rows:
        tokens = line.split()
        if len(tokens) != 3:
            raise InstanceFormatError("edge line needs 'u v w'", line_number)
        u, v, w = _ints(tokens, line_number)
        key = edge_key(u, v)
        if key in seen:
            raise InstanceFormatError("duplicate edge", line_number)
        if u == v or not (1 <= u <= n and 1 <= v <= n) or w < 1:
            raise InstanceFormatError(f"invalid edge {u} {v} {w}", line_number)
        seen.add(key)
        edges.append((u, v, w))

    try:
        network = EdgeServerNetwork(node_count=n, edges=tuple(edges))
        instance = EddInstance(
            network=network,
            destinations=frozenset(header["destinations"]),
            gamma=header["gamma"][0],
            l_limit=header["llimit"][0],
        )
    except (InvalidNetworkError, InvalidInstanceError) as exc:
        raise InstanceFormatError(str(exc)) from exc
    if not network.is_connected:
        raise InstanceFormatError("network is disconnected")
    return instance


def save_solution(solution: EddSolution, path: str | Path, instance: Optional[EddInstance] = None) -> Path:
    lines = [f"total {solution.total_cost}", f"c2e {solution.cost_c2e}", f"e2e {solution.cost_e2e}"]
    lines.extend(f"C {v}" for v in sorted(solution.c2e))
    for u, v in solution.sorted_edges():
        w = instance.network.weight(u, v) if instance is not None else solution.depth[v] - solution.depth[u]
        lines.append(f"E {u} {v} {w}")
    lines.extend(f"D {v} {d}" for v, d in sorted(solution.depth.items()))
    target = Path(path)
    target.write_text("\n".join(lines) + "\n", encoding="ascii")
    return target


def read_solution(path: str | Path) -> EddSolution:
    """The solution exactly as written, declared costs and depths included; nothing is checked against an instance."""
    declared = {"total": 0, "c2e": 0, "e2e": 0}
    c2e: List[int] = []
    e2e: List[Tuple[int, int]] = []
    depth: Dict[int, int] = {}
    for line_number, raw in enumerate(_read_lines(path, "ascii"), start=1):
        line = _strip(raw)
        if not line:
            continue
        tokens = line.split()
        tag = tokens[0]
        if tag in declared and len(tokens) == 2:
            declared[tag] = _ints(tokens[1:], line_number)[0]
        elif tag == "C" and len(tokens) == 2:
            c2e.append(_ints(tokens[1:], line_number)[0])
        elif tag == "E" and len(tokens) == 4:
            u, v, _ = _ints(tokens[1:], line_number)
            e2e.append((u, v))
        elif tag == "D" and len(tokens) == 3:
            v, d = _ints(tokens[1:], line_number)
            depth[v] = d
        else:
            raise InstanceFormatError(f"unknown solution line {line!r}", line_number)
    return EddSolution(
        c2e=frozenset(c2e),
        e2e=frozenset(e2e),
        depth=depth,
        cost_c2e=declared["c2e"],
        cost_e2e=declared["e2e"],
        total_cost=declared["total"],
    )


def load_solution(instance: EddInstance, path: str | Path) -> EddSolution:
    """Read a solution file and re-price it against ``instance``."""
    written = read_solution(path)
    try:
        return solution_cost(instance, written.c2e, written.e2e)
    except InvalidNetworkError as exc:
        raise InstanceFormatError(str(exc)) from exc


def _station_columns(header: List[str]) -> Tuple[int, int, int]:
    lowered = [h.strip().lower() for h in header]

    def find(fragment: str, default: int) -> int:
        for i, name in enumerate(lowered):
            if fragment in name:
                return i
        return default

    return find("id", 0), find("lat", 1), find("lon", 2)


def read_stations(path: str | Path) -> List[Tuple[str, float, float]]:
    stations = []
    reader = csv.reader(_read_lines(path, "utf-8-sig"))
    rows = [row for row in reader if row and any(cell.strip() for cell in row)]
    if not rows:
        return stations
    columns = (0, 1, 2)
    start = 0
    try:
        float(rows[0][1])
    except (ValueError, IndexError):
        columns = _station_columns(rows[0])
        start = 1
    id_col, lat_col, lon_col = columns
    for line_number, row in enumerate(rows[start:], start=start + 1):
        try:
            stations.append((row[id_col].strip(), float(row[lat_col]), float(row[lon_col])))
        except (ValueError, IndexError):
            raise InstanceFormatError(f"bad station row {row!r}", line_number) from None
    return stations


def load_stations(path: str | Path, cfg: GeneratorConfig) -> EddInstance:
    """
    Take ``cfg.n`` stations (first rows, or a seeded sample) and attach the same
    random connected links as ``generate``. Coordinates ride along as metadata.
    """
    if cfg.n is None or cfg.n < 1:
        raise InvalidInstanceError("station loader needs n >= 1")
    stations = read_stations(path)
    if len(stations) < cfg.n:
        raise InvalidInstanceError(f"{path} has {len(stations)} stations, fewer than n={cfg.n}")
    if cfg.sample_stations:
        picked = sorted(int(i) for i in _rng(cfg.seed + 1).choice(len(stations), size=cfg.n, replace=False))
        chosen = [stations[i] for i in picked]
    else:
        chosen = stations[: cfg.n]
    instance = generate(cfg)
    positions = {i + 1: (lat, lon) for i, (_, lat, lon) in enumerate(chosen)}
    network = EdgeServerNetwork(node_count=cfg.n, edges=instance.network.edges, positions=positions)
    logger.info("loaded %d of %d stations from %s", cfg.n, len(stations), path)
    return EddInstance(network=network, destinations=instance.destinations, gamma=instance.gamma, l_limit=instance.l_limit)


def load_edgelist(path: str | Path, cfg: GeneratorConfig) -> EddInstance:
    """
    Whitespace-separated ``u v`` or ``u v w`` lines; ``#`` starts a comment and a
    lone ``u`` declares a vertex. Ids are compacted to 1..N over the largest
    connected component.
    """
    rng = _rng(cfg.seed)
    graph = nx.Graph()
    for line_number, raw in enumerate(_read_lines(path, "utf-8"), start=1):
        line = _strip(raw)
        if not line:
            continue
        tokens = line.split()
        if len(tokens) > 3:
            raise InstanceFormatError(f"too many tokens in {line!r}", line_number)
        values = _ints(tokens, line_number)
        if len(values) == 1:
            graph.add_node(values[0])
            continue
        u, v = values[0], values[1]
        if u == v:
            logger.warning("self-loop %d dropped at line %d", u, line_number)
            graph.add_node(u)
            continue
        if graph.has_edge(u, v):
            logger.warning("repeated edge (%d, %d) dropped at line %d", u, v, line_number)
            continue
        if len(values) == 3:
            w = values[2]
            if w < 1:
                raise InstanceFormatError(f"non-positive weight {w}", line_number)
        else:
            w = int(rng.integers(cfg.weight_min, cfg.weight_max + 1))
        graph.add_edge(u, v, weight=w)

    if graph.number_of_nodes() == 0:
        raise InstanceFormatError("edge list is empty")
    components = sorted(nx.connected_components(graph), key=lambda c: (-len(c), min(c)))
    largest = components[0]
    if len(components) > 1:
        dropped = graph.number_of_nodes() - len(largest)
        logger.warning("edge list disconnected: kept %d nodes, dropped %d outside the largest component",
                       len(largest), dropped)
    relabel = {old: new for new, old in enumerate(sorted(largest), start=1)}
    edges = tuple(
        (relabel[u], relabel[v], int(data["weight"]))
        for u, v, data in graph.subgraph(largest).edges(data=True)
    )
    n = len(relabel)
    try:
        k = cfg.target_destination_count(n)
    except ValueError as exc:
        raise InvalidInstanceError(str(exc)) from exc
    destinations = _sample_destinations(n, k, rng)
    network = EdgeServerNetwork(node_count=n, edges=edges)
    return EddInstance(network=network, destinations=frozenset(destinations), gamma=cfg.gamma, l_limit=cfg.l_limit)


def preset_path(name: str) -> Path:
    return Path(config.settings.preset_dir) / f"{name}.json"


def load_preset(name: str) -> SweepSpec:
    path = preset_path(name)
    if not path.exists():
        raise EddError(f"no preset named {name!r} in {path.parent}")
    return SweepSpec(**json.loads(path.read_text(encoding="utf-8")))


def instance_summary(instance: EddInstance) -> str:
    network = instance.network
    return (
        f"nodes={network.node_count} edges={len(network.edges)} destinations={len(instance.destinations)} "
        f"gamma={instance.gamma} llimit={instance.l_limit}"
    )
