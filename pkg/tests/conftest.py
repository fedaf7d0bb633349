"""Shared graph builders for the test suite."""

from __future__ import annotations

from auvplan.graph import Edge, MissionGraph, Task, Waypoint, edge_distance


def build_graph(coords, edge_specs, start, dest):
    """Assemble a MissionGraph from raw tuples.

    coords maps node id to (x, y, z); edge_specs holds
    (u, v, priority, risk, completion_time) tuples.  Edge distances come
    from the coordinates.
    """
    wps = {i: Waypoint(i, float(x), float(y), float(z)) for i, (x, y, z) in coords.items()}
    edges = tuple(
        Edge(u, v, edge_distance(wps[u], wps[v]), Task(int(rho), float(zeta), float(delta)))
        for u, v, rho, zeta, delta in edge_specs
    )
    return MissionGraph(tuple(wps.values()), edges, start, dest)


def complete_graph(ids, start, dest, spacing=100.0):
    """Complete graph over collinear waypoints carrying unit tasks."""
    ids = list(ids)
    coords = {i: (i * spacing, 0.0, 0.0) for i in ids}
    specs = []
    for a in range(len(ids)):
        for b in range(a + 1, len(ids)):
            specs.append((ids[a], ids[b], 1, 1.0, 0.0))
    return build_graph(coords, specs, start, dest)


def chain_graph(n, spacing=300.0, completion_time=60.0):
    """Path graph 0-1-...-(n-1) with uniform tasks."""
    coords = {i: (i * spacing, 0.0, 0.0) for i in range(n)}
    specs = [(i, i + 1, 1, 1.0, completion_time) for i in range(n - 1)]
    return build_graph(coords, specs, 0, n - 1)
