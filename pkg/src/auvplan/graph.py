"""Mission network model: waypoints, task-bearing edges, routes and their feasibility.

A mission network is an undirected graph of 3-D waypoints.  Every edge carries
one inspection task described by a priority rho, a risk zeta and a completion
time delta.  A route is a waypoint sequence from the network start to its
destination; its travel time adds cruise time (distance over vehicle speed)
and task completion time per traversed edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

DEFAULT_SPEED = 3.0  # m/s cruise speed


class InvalidParameterError(ValueError):
    """Raised when an operation receives out-of-domain parameters."""


class InvalidRouteError(ValueError):
    """Raised when a route references nodes or edges the graph does not have."""


@dataclass(frozen=True)
class Waypoint:
    """A named 3-D location."""

    id: int
    x: float
    y: float
    z: float

    def coords(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass(frozen=True)
class Task:
    """Inspection task attached to an edge."""

    priority: int
    risk: float
    completion_time: float

    def __post_init__(self) -> None:
        if self.priority < 1:
            raise InvalidParameterError(f"task priority must be >= 1, got {self.priority}")
        if self.risk <= 0.0:
            raise InvalidParameterError(f"task risk must be > 0, got {self.risk}")
        if self.completion_time < 0.0:
            raise InvalidParameterError(
                f"task completion time must be >= 0, got {self.completion_time}"
            )

    @property
    def weight(self) -> float:
        """Priority gained per unit of risk taken."""
        return self.priority / self.risk


@dataclass(frozen=True)
class Edge:
    """Undirected edge between two waypoints, carrying one task."""

    u: int
    v: int
    distance: float
    task: Task

    def __post_init__(self) -> None:
        if self.u == self.v:
            raise InvalidParameterError(f"self-loop edge at node {self.u}")
        if self.distance < 0.0:
            raise InvalidParameterError(f"edge distance must be >= 0, got {self.distance}")

    @property
    def key(self) -> tuple[int, int]:
        return (self.u, self.v) if self.u < self.v else (self.v, self.u)


def edge_distance(a: Waypoint, b: Waypoint) -> float:
    """Euclidean 3-D distance between two waypoints."""
    return math.dist(a.coords(), b.coords())


def edge_traverse_time(e: Edge, v_auv: float = DEFAULT_SPEED) -> float:
    """Cruise time along the edge plus the task completion time."""
    if v_auv <= 0.0:
        raise InvalidParameterError(f"vehicle speed must be > 0, got {v_auv}")
    return e.distance / v_auv + e.task.completion_time


@dataclass
class MissionGraph:
    """Immutable-by-convention mission network.

    Lookup structures are built once in __post_init__; treat instances as
    read-only after construction.
    """

    waypoints: tuple[Waypoint, ...]
    edges: tuple[Edge, ...]
    start_id: int
    dest_id: int

    def __post_init__(self) -> None:
        ids = [wp.id for wp in self.waypoints]
        if len(set(ids)) != len(ids):
            raise InvalidParameterError("duplicate waypoint ids")
        id_set = set(ids)
        for node in (self.start_id, self.dest_id):
            if node not in id_set:
                raise InvalidParameterError(f"endpoint {node} is not a graph node")
        if self.start_id == self.dest_id:
            raise InvalidParameterError("start and destination must differ")
        self._wp_by_id = {wp.id: wp for wp in self.waypoints}
        edge_map: dict[tuple[int, int], Edge] = {}
        neighbors: dict[int, list[int]] = {wp.id: [] for wp in self.waypoints}
        for e in self.edges:
            if e.u not in id_set or e.v not in id_set:
                raise InvalidParameterError(f"edge {e.u}-{e.v} references unknown node")
            if e.key in edge_map:
                raise InvalidParameterError(f"duplicate edge {e.u}-{e.v}")
            edge_map[e.key] = e
            neighbors[e.u].append(e.v)
            neighbors[e.v].append(e.u)
        self._edge_map = edge_map
        self._neighbors = {k: tuple(sorted(vs)) for k, vs in neighbors.items()}
        ratios = [e.task.risk / e.task.priority for e in self.edges]
        self._max_risk_ratio = max(ratios) if ratios else 1.0

    @property
    def n_waypoints(self) -> int:
        return len(self.waypoints)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def max_risk_ratio(self) -> float:
        """Largest zeta/rho over all edges; used to normalize task cost."""
        return self._max_risk_ratio

    def waypoint(self, node_id: int) -> Waypoint:
        try:
            return self._wp_by_id[node_id]
        except KeyError:
            raise InvalidRouteError(f"unknown waypoint id {node_id}") from None

    def has_node(self, node_id: int) -> bool:
        return node_id in self._wp_by_id

    def has_edge(self, a: int, b: int) -> bool:
        key = (a, b) if a < b else (b, a)
        return key in self._edge_map

    def edge_between(self, a: int, b: int) -> Edge:
        key = (a, b) if a < b else (b, a)
        try:
            return self._edge_map[key]
        except KeyError:
            raise InvalidRouteError(f"no edge between {a} and {b}") from None

    def neighbors(self, node_id: int) -> tuple[int, ...]:
        return self._neighbors.get(node_id, ())

    def with_start(self, new_start: int) -> "MissionGraph":
        """Same network rooted at a different start waypoint."""
        if not self.has_node(new_start):
            raise InvalidParameterError(f"start {new_start} is not a graph node")
        return MissionGraph(self.waypoints, self.edges, new_start, self.dest_id)

    def without_edges(self, removed: Iterable[tuple[int, int]]) -> "MissionGraph":
        """Copy of the network with the given edges deleted."""
        drop = {(a, b) if a < b else (b, a) for a, b in removed}
        kept = tuple(e for e in self.edges if e.key not in drop)
        return MissionGraph(self.waypoints, kept, self.start_id, self.dest_id)

    def is_connected(self, a: int, b: int) -> bool:
        """Breadth-first reachability check between two nodes."""
        if not (self.has_node(a) and self.has_node(b)):
            return False
        seen = {a}
        frontier = [a]
        while frontier:
            nxt = []
            for node in frontier:
                for nb in self.neighbors(node):
                    if nb == b:
                        return True
                    if nb not in seen:
                        seen.add(nb)
                        nxt.append(nb)
            frontier = nxt
        return a == b


@dataclass(frozen=True)
class Route:
    """Waypoint id sequence, optionally carrying cached evaluation results."""

    sequence: tuple[int, ...]
    route_time: float | None = None
    route_weight: float | None = None

    def __post_init__(self) -> None:
        if len(self.sequence) == 0:
            raise InvalidParameterError("route sequence must not be empty")

    @property
    def n_legs(self) -> int:
        return len(self.sequence) - 1

    def legs(self) -> tuple[tuple[int, int], ...]:
        seq = self.sequence
        return tuple((seq[i], seq[i + 1]) for i in range(len(seq) - 1))

    def evaluated(self, g: MissionGraph, v_auv: float = DEFAULT_SPEED) -> "Route":
        """Copy with route_time and route_weight filled in."""
        return replace(
            self,
            route_time=route_time(self, g, v_auv),
            route_weight=route_weight(self, g),
        )


def route_time(r: Route, g: MissionGraph, v_auv: float = DEFAULT_SPEED) -> float:
    """Total travel time: sum of cruise plus task time over every traversed edge."""
    total = 0.0
    for a, b in r.legs():
        total += edge_traverse_time(g.edge_between(a, b), v_auv)
    return total


def route_distance(r: Route, g: MissionGraph) -> float:
    """Total path length over the route's edges."""
    return sum(g.edge_between(a, b).distance for a, b in r.legs())


def route_weight(r: Route, g: MissionGraph) -> float:
    """Sum of priority/risk over every traversed edge."""
    return sum(g.edge_between(a, b).task.weight for a, b in r.legs())


@dataclass(frozen=True)
class FeasibilityReport:
    """Outcome of the five route feasibility checks."""

    bad_endpoints: bool
    missing_edges: tuple[tuple[int, int], ...]
    repeated_nodes: tuple[int, ...]
    repeated_edges: tuple[tuple[int, int], ...]
    over_budget: bool
    route_time: float | None

    @property
    def structurally_valid(self) -> bool:
        return not (
            self.bad_endpoints
            or self.missing_edges
            or self.repeated_nodes
            or self.repeated_edges
        )

    @property
    def is_valid(self) -> bool:
        return self.structurally_valid and not self.over_budget

    def violations(self) -> tuple[str, ...]:
        found: list[str] = []
        if self.bad_endpoints:
            found.append("endpoints differ from the network start/destination")
        for a, b in self.missing_edges:
            found.append(f"edge {a}-{b} does not exist")
        for node in self.repeated_nodes:
            found.append(f"node {node} appears more than once")
        for a, b in self.repeated_edges:
            found.append(f"edge {a}-{b} traversed more than once")
        if self.over_budget:
            found.append("route time exceeds the available time")
        return tuple(found)


def validate_route(
    r: Route,
    g: MissionGraph,
    t_available: float = math.inf,
    v_auv: float = DEFAULT_SPEED,
) -> FeasibilityReport:
    """Check a route against the five feasibility criteria.

    Checks: endpoints match the network start/destination, every leg is a
    graph edge, no node repeats, no edge repeats, and travel time stays
    below t_available.  The time check only runs when all legs exist.
    """
    seq = r.sequence
    bad_endpoints = seq[0] != g.start_id or seq[-1] != g.dest_id

    missing: list[tuple[int, int]] = []
    seen_edges: set[tuple[int, int]] = set()
    repeated_edges: list[tuple[int, int]] = []
    for a, b in r.legs():
        if not (g.has_node(a) and g.has_node(b) and g.has_edge(a, b)):
            missing.append((a, b))
            continue
        key = (a, b) if a < b else (b, a)
        if key in seen_edges:
            if key not in repeated_edges:
                repeated_edges.append(key)
        seen_edges.add(key)

    counts: dict[int, int] = {}
    for node in seq:
        counts[node] = counts.get(node, 0) + 1
    repeated_nodes = tuple(sorted(n for n, c in counts.items() if c > 1))

    t_route: float | None = None
    over_budget = False
    if not missing:
        t_route = route_time(r, g, v_auv)
        over_budget = not (t_route < t_available)

    return FeasibilityReport(
        bad_endpoints=bad_endpoints,
        missing_edges=tuple(missing),
        repeated_nodes=repeated_nodes,
        repeated_edges=tuple(repeated_edges),
        over_budget=over_budget,
        route_time=t_route,
    )


@dataclass(frozen=True)
class TaskRanges:
    """Sampling ranges for random task parameters."""

    priority: tuple[int, int] = (1, 10)
    risk: tuple[float, float] = (1.0, 100.0)
    completion_time: tuple[float, float] = (60.0, 600.0)

    def __post_init__(self) -> None:
        if self.priority[0] < 1 or self.priority[1] < self.priority[0]:
            raise InvalidParameterError(f"bad priority range {self.priority}")
        if self.risk[0] <= 0.0 or self.risk[1] < self.risk[0]:
            raise InvalidParameterError(f"bad risk range {self.risk}")
        if self.completion_time[0] < 0.0 or self.completion_time[1] < self.completion_time[0]:
            raise InvalidParameterError(f"bad completion time range {self.completion_time}")


def max_edge_count(n_waypoints: int) -> int:
    """Edge capacity of a simple undirected graph."""
    return n_waypoints * (n_waypoints - 1) // 2


def generate_random_network(
    n_waypoints: int,
    target_edge_count: int,
    seed: int,
    task_ranges: TaskRanges = TaskRanges(),
    xy_range: tuple[float, float] = (0.0, 10000.0),
    z_range: tuple[float, float] = (0.0, 100.0),
    start_id: int | None = None,
    dest_id: int | None = None,
) -> MissionGraph:
    """Generate a connected random mission network.

    Waypoint x/y are uniform over xy_range and z over z_range.  Connectivity
    comes from a random spanning tree; extra edges are added uniformly
    without duplicates until target_edge_count is reached.  Requests above
    the simple-graph capacity n(n-1)/2 saturate at the complete graph.
    """
    if n_waypoints < 2:
        raise InvalidParameterError(f"need at least 2 waypoints, got {n_waypoints}")
    if target_edge_count < n_waypoints - 1:
        raise InvalidParameterError(
            f"{target_edge_count} edges cannot connect {n_waypoints} waypoints"
        )
    n_edges = min(target_edge_count, max_edge_count(n_waypoints))

    rng = np.random.default_rng(int(seed))
    xs = rng.uniform(xy_range[0], xy_range[1], n_waypoints)
    ys = rng.uniform(xy_range[0], xy_range[1], n_waypoints)
    zs = rng.uniform(z_range[0], z_range[1], n_waypoints)
    waypoints = tuple(
        Waypoint(i, float(xs[i]), float(ys[i]), float(zs[i])) for i in range(n_waypoints)
    )

    # Random spanning tree: attach each node (in shuffled order) to a node
    # placed earlier in the shuffle.
    order = rng.permutation(n_waypoints)
    pairs: set[tuple[int, int]] = set()
    for i in range(1, n_waypoints):
        a = int(order[i])
        b = int(order[rng.integers(0, i)])
        pairs.add((a, b) if a < b else (b, a))
    while len(pairs) < n_edges:
        a, b = (int(x) for x in rng.integers(0, n_waypoints, 2))
        if a == b:
            continue
        pairs.add((a, b) if a < b else (b, a))

    edges = []
    for a, b in sorted(pairs):
        p_lo, p_hi = task_ranges.priority
        task = Task(
            priority=int(rng.integers(p_lo, p_hi + 1)),
            risk=float(rng.uniform(*task_ranges.risk)),
            completion_time=float(rng.uniform(*task_ranges.completion_time)),
        )
        edges.append(Edge(a, b, edge_distance(waypoints[a], waypoints[b]), task))

    return MissionGraph(
        waypoints=waypoints,
        edges=tuple(edges),
        start_id=0 if start_id is None else start_id,
        dest_id=n_waypoints - 1 if dest_id is None else dest_id,
    )


GRAPH_HEADER = "# auvplan network v1"


def save_graph(g: MissionGraph, path) -> None:
    """Write the network as line-oriented text; floats keep full precision."""
    lines = [GRAPH_HEADER, f"nodes {g.n_waypoints} start {g.start_id} dest {g.dest_id}"]
    for wp in g.waypoints:
        lines.append(f"wp {wp.id} {wp.x!r} {wp.y!r} {wp.z!r}")
    for e in g.edges:
        t = e.task
        lines.append(f"edge {e.u} {e.v} {t.priority} {t.risk!r} {t.completion_time!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_graph(path) -> MissionGraph:
    """Read a network written by save_graph; inverse up to float identity."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip()]
    if not lines or lines[0] != GRAPH_HEADER:
        raise InvalidParameterError(f"{path}: not an auvplan network file")
    head = lines[1].split()
    if len(head) != 6 or head[0] != "nodes" or head[2] != "start" or head[4] != "dest":
        raise InvalidParameterError(f"{path}: malformed header line {lines[1]!r}")
    start_id, dest_id = int(head[3]), int(head[5])

    waypoints: list[Waypoint] = []
    edges: list[Edge] = []
    wp_by_id: dict[int, Waypoint] = {}
    for ln in lines[2:]:
        parts = ln.split()
        if parts[0] == "wp" and len(parts) == 5:
            wp = Waypoint(int(parts[1]), float(parts[2]), float(parts[3]), float(parts[4]))
            waypoints.append(wp)
            wp_by_id[wp.id] = wp
        elif parts[0] == "edge" and len(parts) == 6:
            u, v = int(parts[1]), int(parts[2])
            task = Task(int(parts[3]), float(parts[4]), float(parts[5]))
            edges.append(Edge(u, v, edge_distance(wp_by_id[u], wp_by_id[v]), task))
        else:
            raise InvalidParameterError(f"{path}: malformed record {ln!r}")
    if len(waypoints) != int(head[1]):
        raise InvalidParameterError(f"{path}: waypoint count mismatch")
    return MissionGraph(tuple(waypoints), tuple(edges), start_id, dest_id)
