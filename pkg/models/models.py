"""
Domain types for edge data distribution (EDD) planning.

Node ids of edge servers run from 1 to N. The cloud is the virtual node
``CLOUD`` (id 0); its links to edge servers are implicit and all cost gamma.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Dict, FrozenSet, Iterator, List, Mapping, Optional, Tuple

import networkx as nx
import numpy as np
from pydantic import BaseModel, root_validator, validator

from models.errors import InvalidInstanceError, InvalidNetworkError

CLOUD = 0

Edge = Tuple[int, int, int]
Arc = Tuple[int, int]


def edge_key(u: int, v: int) -> Tuple[int, int]:
    return (u, v) if u < v else (v, u)


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def _as_length(value: Any) -> int:
    if isinstance(value, bool):
        raise InvalidNetworkError(f"weight {value!r} is not an integer")
    if isinstance(value, (float, np.floating)):
        if not float(value).is_integer():
            raise InvalidNetworkError(f"weight {value!r} is not an integer")
    return int(value)


@dataclass(frozen=True)
class EdgeServerNetwork:
    node_count: int
    edges: Tuple[Edge, ...]
    positions: Optional[Mapping[int, Tuple[float, float]]] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        if self.node_count < 1:
            raise InvalidNetworkError("node_count must be positive")
        seen = set()
        normalized = []
        for u, v, w in self.edges:
            u, v, w = int(u), int(v), _as_length(w)
            if u == v:
                raise InvalidNetworkError(f"self-loop at node {u}")
            for node in (u, v):
                if not 1 <= node <= self.node_count:
                    raise InvalidNetworkError(f"node {node} outside 1..{self.node_count}")
            if w < 1:
                raise InvalidNetworkError(f"edge ({u}, {v}) has non-positive weight {w}")
            key = edge_key(u, v)
            if key in seen:
                raise InvalidNetworkError(f"duplicate edge ({key[0]}, {key[1]})")
            seen.add(key)
            normalized.append((key[0], key[1], w))
        object.__setattr__(self, "edges", tuple(sorted(normalized)))

    @property
    def nodes(self) -> range:
        return range(1, self.node_count + 1)

    @cached_property
    def adjacency(self) -> Dict[int, Tuple[Tuple[int, int], ...]]:
        """Neighbour lists ``node -> ((neighbour, weight), ...)`` in ascending neighbour order."""
        adj: Dict[int, List[Tuple[int, int]]] = {v: [] for v in self.nodes}
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return {v: tuple(sorted(items)) for v, items in adj.items()}

    @cached_property
    def _weights(self) -> Dict[Tuple[int, int], int]:
        return {(u, v): w for u, v, w in self.edges}

    def has_edge(self, u: int, v: int) -> bool:
        return edge_key(u, v) in self._weights

    def weight(self, u: int, v: int) -> int:
        try:
            return self._weights[edge_key(u, v)]
        except KeyError:
            raise InvalidNetworkError(f"no edge ({u}, {v})") from None

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    @property
    def max_weight(self) -> int:
        return max((w for _, _, w in self.edges), default=0)

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(self.nodes)
        graph.add_weighted_edges_from(self.edges)
        if self.positions:
            nx.set_node_attributes(graph, dict(self.positions), "pos")
        return graph

    @cached_property
    def is_connected(self) -> bool:
        return nx.is_connected(self.to_networkx())


@dataclass(frozen=True)
class EddInstance:
    network: EdgeServerNetwork
    destinations: FrozenSet[int]
    gamma: int
    l_limit: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "destinations", frozenset(int(r) for r in self.destinations))
        if not self.destinations:
            raise InvalidInstanceError("destination set is empty")
        bad = sorted(r for r in self.destinations if not 1 <= r <= self.network.node_count)
        if bad:
            raise InvalidInstanceError(f"destinations outside 1..{self.network.node_count}: {bad}")
        if self.gamma < 1:
            raise InvalidInstanceError(f"gamma must be positive, got {self.gamma}")
        if self.l_limit < self.gamma:
            raise InvalidInstanceError(f"llimit {self.l_limit} is below gamma {self.gamma}")

    @property
    def node_count(self) -> int:
        return self.network.node_count

    @property
    def slack(self) -> int:
        """K = L_limit - gamma, the edge-network budget left after the cloud hop."""
        return self.l_limit - self.gamma

    @cached_property
    def sorted_destinations(self) -> Tuple[int, ...]:
        return tuple(sorted(self.destinations))

    def with_limits(self, gamma: Optional[int] = None, l_limit: Optional[int] = None) -> "EddInstance":
        return EddInstance(
            network=self.network,
            destinations=self.destinations,
            gamma=self.gamma if gamma is None else gamma,
            l_limit=self.l_limit if l_limit is None else l_limit,
        )


@dataclass(frozen=True)
class EddSolution:
    c2e: FrozenSet[int]
    e2e: FrozenSet[Arc]
    depth: Mapping[int, int]
    cost_c2e: int
    cost_e2e: int
    total_cost: int
    algorithm: str = ""
    proven_optimal: Optional[bool] = None

    @property
    def covered(self) -> FrozenSet[int]:
        return frozenset(self.depth)

    def parent_map(self) -> Dict[int, int]:
        parents = {v: CLOUD for v in self.c2e}
        for u, v in self.e2e:
            parents[v] = u
        return parents

    def sorted_edges(self) -> List[Arc]:
        return sorted(self.e2e)

    def tagged(self, algorithm: str, proven_optimal: Optional[bool] = None) -> "EddSolution":
        return replace(self, algorithm=algorithm, proven_optimal=proven_optimal)


@dataclass
class FeasibilityReport:
    violations: List[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, message: str) -> None:
        self.violations.append(message)

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class MetricClosure:
    """All-pairs shortest distances; row and column 0 are unused so node ids index directly."""

    dist: np.ndarray
    next_hop: np.ndarray

    @property
    def node_count(self) -> int:
        return self.dist.shape[0] - 1

    def distance(self, u: int, v: int) -> int:
        return int(self.dist[u, v])

    def path(self, u: int, v: int) -> List[int]:
        nodes = [u]
        while u != v:
            u = int(self.next_hop[u, v])
            nodes.append(u)
        return nodes

    def path_edges(self, u: int, v: int) -> List[Edge]:
        nodes = self.path(u, v)
        return [(a, b, int(self.dist[a, b])) for a, b in zip(nodes, nodes[1:])]


@dataclass(frozen=True)
class InducedGraph:
    """Complete graph on ``vertices`` weighted by closure distances (a view, no copy)."""

    closure: MetricClosure
    vertices: Tuple[int, ...]

    def weight(self, u: int, v: int) -> int:
        return self.closure.distance(u, v)

    def edges(self) -> Iterator[Edge]:
        for i, u in enumerate(self.vertices):
            for v in self.vertices[i + 1:]:
                yield (u, v, self.closure.distance(u, v))

    @property
    def edge_count(self) -> int:
        k = len(self.vertices)
        return k * (k - 1) // 2


@dataclass(frozen=True)
class Triple:
    members: Tuple[int, int, int]
    centroid: int
    d_z: int


@dataclass(frozen=True, eq=False)
class SaveTable:
    terminals: Tuple[int, ...]
    values: np.ndarray

    @cached_property
    def index(self) -> Dict[int, int]:
        return {t: i for i, t in enumerate(self.terminals)}

    def save(self, a: int, b: int) -> int:
        return int(self.values[self.index[a], self.index[b]])

    def __len__(self) -> int:
        k = len(self.terminals)
        return k * (k - 1) // 2


@dataclass(frozen=True)
class SteinerTree:
    vertices: FrozenSet[int]
    edges: Tuple[Edge, ...]
    total_weight: int

    @cached_property
    def adjacency(self) -> Dict[int, List[Tuple[int, int]]]:
        adj: Dict[int, List[Tuple[int, int]]] = {v: [] for v in self.vertices}
        for u, v, w in self.edges:
            adj[u].append((v, w))
            adj[v].append((u, w))
        return {v: sorted(items) for v, items in adj.items()}

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def edge_set(self) -> FrozenSet[Tuple[int, int]]:
        return frozenset((u, v) for u, v, _ in self.edges)


@dataclass(frozen=True)
class RootedDistributionTree:
    root: int
    parent: Mapping[int, int]
    path_length: Mapping[int, int]

    def children(self) -> Dict[int, List[int]]:
        kids: Dict[int, List[int]] = {CLOUD: []}
        for v in self.parent:
            kids.setdefault(v, [])
        for v, p in self.parent.items():
            kids.setdefault(p, []).append(v)
        return {v: sorted(items) for v, items in kids.items()}


@dataclass(frozen=True)
class ExpandedHopGraph:
    network: EdgeServerNetwork
    original_node_count: int
    chains: Mapping[Tuple[int, int], Tuple[int, ...]]

    def is_temporary(self, v: int) -> bool:
        return v > self.original_node_count

    @property
    def temporary_count(self) -> int:
        return self.network.node_count - self.original_node_count


class GeneratorConfig(BaseModel):
    n: Optional[int] = None
    delta: Optional[float] = None
    edge_count: Optional[int] = None
    rho: Optional[float] = None
    destination_count: Optional[int] = None
    weight_min: int = 1
    weight_max: int = 50
    gamma: int = 100
    l_limit: int
    seed: int = 1
    sample_stations: bool = False

    @validator("n")
    def _n_positive(cls, value):
        if value is not None and value < 1:
            raise ValueError(f"n must be positive, got {value}")
        return value

    @validator("delta")
    def _delta_positive(cls, value):
        if value is not None and value <= 0:
            raise ValueError(f"delta must be positive, got {value}")
        return value

    @validator("rho")
    def _rho_range(cls, value):
        if value is not None and not 0 < value <= 1:
            raise ValueError(f"rho must lie in (0, 1], got {value}")
        return value

    @validator("weight_min")
    def _weight_floor(cls, value):
        if value < 1:
            raise ValueError(f"weight_min must be at least 1, got {value}")
        return value

    @validator("gamma")
    def _gamma_positive(cls, value):
        if value < 1:
            raise ValueError(f"gamma must be positive, got {value}")
        return value

    @root_validator(skip_on_failure=True)
    def _check_bounds(cls, values):
        if values["weight_max"] < values["weight_min"]:
            raise ValueError(f"weight_max {values['weight_max']} is below weight_min {values['weight_min']}")
        if values["l_limit"] < values["gamma"]:
            raise ValueError(f"llimit {values['l_limit']} is below gamma {values['gamma']}")
        n = values.get("n")
        if n is None:
            return values
        if values.get("delta") is not None or values.get("edge_count") is not None:
            m = _target_edges(n, values.get("delta"), values.get("edge_count"))
            if m < n - 1:
                raise ValueError(f"{m} edges is below the connectivity floor of {n - 1} (delta >= (n-1)/n)")
            if m > n * (n - 1) // 2:
                raise ValueError(f"{m} edges exceeds the complete graph bound of {n * (n - 1) // 2}")
        if values.get("rho") is not None or values.get("destination_count") is not None:
            k = _target_destinations(n, values.get("rho"), values.get("destination_count"))
            if not 1 <= k <= n:
                raise ValueError(f"{k} destinations is outside 1..{n}")
        return values

    def target_edge_count(self) -> int:
        if self.n is None:
            raise ValueError("node count is not set")
        if self.delta is None and self.edge_count is None:
            raise ValueError("either delta or edge_count is required")
        return _target_edges(self.n, self.delta, self.edge_count)

    def target_destination_count(self, n: Optional[int] = None) -> int:
        n = self.n if n is None else n
        if n is None:
            raise ValueError("node count is not set")
        if self.rho is None and self.destination_count is None:
            raise ValueError("either rho or destination_count is required")
        k = _target_destinations(n, self.rho, self.destination_count)
        if not 1 <= k <= n:
            raise ValueError(f"{k} destinations is outside 1..{n}")
        return k


def _target_edges(n: int, delta: Optional[float], edge_count: Optional[int]) -> int:
    if edge_count is not None:
        return edge_count
    return round_half_up(delta * n)


def _target_destinations(n: int, rho: Optional[float], destination_count: Optional[int]) -> int:
    if destination_count is not None:
        return destination_count
    return round_half_up(rho * n)


SWEEP_PARAMS = ("n", "r", "llimit", "rho", "delta")
ALGORITHMS = ("exact", "nste", "edd-a", "greedy", "random")

# varied sweep parameter -> GeneratorConfig field it overrides
_PARAM_FIELDS = {"n": "n", "r": "destination_count", "llimit": "l_limit", "rho": "rho", "delta": "delta"}
_INTEGER_PARAMS = {"n", "r", "llimit"}


class TopologySource(BaseModel):
    kind: str = "random"
    path: Optional[str] = None

    @validator("kind")
    def _known_kind(cls, value):
        if value not in ("random", "eua", "edgelist"):
            raise ValueError(f"unknown topology source {value!r}")
        return value

    @root_validator(skip_on_failure=True)
    def _path_required(cls, values):
        if values["kind"] != "random" and not values.get("path"):
            raise ValueError(f"topology source {values['kind']!r} needs a path")
        return values


class SweepSpec(BaseModel):
    name: str = "custom"
    param: str
    values: List[float]
    fixed: Dict[str, Any] = {}
    algorithms: List[str] = ["nste", "edd-a", "greedy", "random"]
    repetitions: int = 1
    base_seed: int = 1
    topology: TopologySource = TopologySource()

    @validator("param")
    def _known_param(cls, value):
        if value not in SWEEP_PARAMS:
            raise ValueError(f"unknown sweep parameter {value!r}, expected one of {', '.join(SWEEP_PARAMS)}")
        return value

    @validator("values")
    def _sorted_values(cls, value):
        if not value:
            raise ValueError("value list is empty")
        if list(value) != sorted(value):
            raise ValueError("value list must be sorted ascending")
        return value

    @validator("algorithms")
    def _known_algorithms(cls, value):
        unknown = [a for a in value if a not in ALGORITHMS]
        if unknown or not value:
            raise ValueError(f"unknown algorithms {unknown}, expected a subset of {', '.join(ALGORITHMS)}")
        return value

    @validator("repetitions")
    def _positive_reps(cls, value):
        if value < 1:
            raise ValueError("repetitions must be at least 1")
        return value

    @root_validator(skip_on_failure=True)
    def _integral_values(cls, values):
        if values["param"] in _INTEGER_PARAMS:
            bad = [v for v in values["values"] if not float(v).is_integer()]
            if bad:
                raise ValueError(f"parameter {values['param']} takes integers, got {bad}")
        return values

    def format_value(self, value: float) -> str:
        if self.param in _INTEGER_PARAMS or float(value).is_integer():
            return str(int(value))
        return repr(float(value))

    def point_config(self, value: float, seed: int) -> GeneratorConfig:
        fields = dict(self.fixed)
        if self.param == "r":
            fields.pop("rho", None)
        if self.param == "rho":
            fields.pop("destination_count", None)
        if self.param == "delta":
            fields.pop("edge_count", None)
        field_name = _PARAM_FIELDS[self.param]
        fields[field_name] = int(value) if self.param in _INTEGER_PARAMS else float(value)
        fields["seed"] = seed
        return GeneratorConfig(**fields)

    def point_seed(self, point_index: int, rep: int) -> int:
        state = np.random.SeedSequence([self.base_seed, point_index, rep]).generate_state(1)
        return int(state[0])
