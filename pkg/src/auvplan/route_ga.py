"""Global route planning: a genetic algorithm over task-graph routes.

Individuals are whole routes.  The initial population decodes random
per-node priority vectors with a greedy adjacency walk that always stays
structurally feasible; crossover mixes gene positions between two parents
and mutation rearranges interior waypoints, with offspring that fail the
structural checks discarded.  The cost rewards filling the available time
budget with low risk-per-priority tasks; routes over budget are penalized
multiplicatively, and the returned best is always within budget.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np

from .graph import (
    DEFAULT_SPEED,
    InvalidParameterError,
    MissionGraph,
    Route,
    route_distance,
    route_time,
    route_weight,
    validate_route,
)
from .seeding import rng_from

VISITED_PRIORITY = -1.0e4

MutationKind = Literal["insertion", "swap", "inversion"]
MUTATION_KINDS: tuple[MutationKind, ...] = ("insertion", "swap", "inversion")


class InfeasibleRouteError(RuntimeError):
    """Raised when no route can satisfy the structural or budget constraints."""


@dataclass(frozen=True)
class GaConfig:
    """Genetic algorithm parameters."""

    population_size: int = 100
    max_iterations: int = 150
    stall_generations: int = 30
    crossover_mix: float = 0.5
    mutation_prob: float = 0.3
    mutation_weights: tuple[float, float, float] = (1.0, 1.0, 1.0)
    penalty_factor: float = 1.0e3
    phi_task: float = 0.5
    phi_route: float = 0.5

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise InvalidParameterError("population size must be >= 2")
        if self.max_iterations < 1 or self.stall_generations < 1:
            raise InvalidParameterError("iteration limits must be >= 1")
        if not 0.0 <= self.crossover_mix <= 1.0:
            raise InvalidParameterError("crossover mix must be in [0, 1]")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise InvalidParameterError("mutation probability must be in [0, 1]")
        if self.penalty_factor <= 1.0:
            raise InvalidParameterError("penalty factor must be > 1")
        if any(w < 0 for w in self.mutation_weights) or sum(self.mutation_weights) <= 0:
            raise InvalidParameterError("mutation weights must be non-negative, not all zero")


@dataclass
class GaRunStats:
    """Traces and summary of one planning run."""

    best_costs: list[float] = field(default_factory=list)
    mean_costs: list[float] = field(default_factory=list)
    violations: list[float] = field(default_factory=list)
    best_route: Route | None = None
    best_cost: float = float("inf")
    route_time: float = 0.0
    total_distance: float = 0.0
    total_weight: float = 0.0
    n_tasks: int = 0
    generations: int = 0
    cpu_seconds: float = 0.0


def _shortest_hop_path(g: MissionGraph, a: int, b: int) -> list[int]:
    # Breadth-first with sorted neighbor order; deterministic.
    if a == b:
        return [a]
    parent: dict[int, int] = {a: a}
    frontier = [a]
    while frontier:
        nxt: list[int] = []
        for node in frontier:
            for nb in g.neighbors(node):
                if nb in parent:
                    continue
                parent[nb] = node
                if nb == b:
                    path = [b]
                    while path[-1] != a:
                        path.append(parent[path[-1]])
                    return path[::-1]
                nxt.append(nb)
        frontier = nxt
    raise InfeasibleRouteError(f"no path connects {a} to {b}")


def build_feasible_route(priority_vector: Sequence[float], g: MissionGraph) -> Route:
    """Decode a per-node priority vector into a structurally feasible route.

    Starting from the network start, the walk repeatedly moves along an
    unused edge to the unvisited neighbor with the highest priority; visited
    nodes drop to a large negative priority and never win.  If the walk dead
    ends or hits the node-count cap before the destination, trailing nodes
    are replaced until the tail connects to the destination directly, with
    a hop-count-shortest path as the last resort.
    """
    pv = np.asarray(priority_vector, dtype=np.float64)
    if pv.shape != (g.n_waypoints,):
        raise InvalidParameterError(
            f"priority vector must have one entry per waypoint, got shape {pv.shape}"
        )
    index = {wp.id: i for i, wp in enumerate(g.waypoints)}
    work = pv.copy()
    start, dest = g.start_id, g.dest_id
    seq = [start]
    work[index[start]] = VISITED_PRIORITY
    used: set[tuple[int, int]] = set()
    current = start

    while current != dest and len(seq) < g.n_waypoints:
        best_nb = None
        best_p = -np.inf
        for nb in g.neighbors(current):
            key = (current, nb) if current < nb else (nb, current)
            if key in used:
                continue
            p = work[index[nb]]
            if p > VISITED_PRIORITY and p > best_p:
                best_p = p
                best_nb = nb
        if best_nb is None:
            break  # dead end: every usable neighbor already visited
        used.add((current, best_nb) if current < best_nb else (best_nb, current))
        seq.append(best_nb)
        work[index[best_nb]] = VISITED_PRIORITY
        current = best_nb

    if current != dest:
        # Replace trailing nodes with the destination; keep the longest
        # prefix whose tail has a direct edge to it.
        while len(seq) > 1 and not g.has_edge(seq[-1], dest):
            seq.pop()
        if g.has_edge(seq[-1], dest):
            seq.append(dest)
        else:
            seq = _shortest_hop_path(g, start, dest)
    return Route(tuple(seq))


def route_cost(
    r: Route,
    g: MissionGraph,
    t_available: float,
    cfg: GaConfig = GaConfig(),
    v_auv: float = DEFAULT_SPEED,
) -> float:
    """Mixed route cost: task quality plus budget utilization.

    The task term is the mean risk-per-priority of the selected edges,
    normalized by the graph-wide maximum to [0, 1]; the utilization term is
    the relative gap between route time and the available time.  A route at
    or over the available time has its cost multiplied by the penalty
    factor.
    """
    if t_available <= 0.0:
        raise InvalidParameterError(f"available time must be > 0, got {t_available}")
    t = route_time(r, g, v_auv)
    legs = r.legs()
    if legs:
        ratio = sum(
            g.edge_between(a, b).task.risk / g.edge_between(a, b).task.priority
            for a, b in legs
        ) / len(legs)
        cost_task = ratio / g.max_risk_ratio
    else:
        cost_task = 0.0
    cost_route = abs(t - t_available) / t_available
    cost = cfg.phi_task * cost_task + cfg.phi_route * cost_route
    if not t < t_available:
        cost *= cfg.penalty_factor
    return cost


def roulette_select(costs: Sequence[float], rng: int | np.random.Generator) -> int:
    """Pick an index with probability proportional to (max cost - cost)."""
    if len(costs) == 0:
        raise InvalidParameterError("cannot select from an empty population")
    gen = rng_from(rng)
    arr = np.asarray(costs, dtype=np.float64)
    fitness = (arr.max() - arr) + 1.0e-9
    total = fitness.sum()
    pick = gen.uniform(0.0, total)
    return int(np.searchsorted(np.cumsum(fitness), pick))


def mix_interior_genes(
    seq1: Sequence[int], seq2: Sequence[int], mask: Sequence[bool]
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Swap genes between two sequences at masked interior positions.

    The mask covers positions 1 .. min(len) - 2; each sequence keeps its own
    length, endpoints and any tail beyond the shorter parent.
    """
    overlap = min(len(seq1), len(seq2)) - 2
    if len(mask) != overlap:
        raise InvalidParameterError(
            f"mask must cover the {overlap} overlapping interior positions"
        )
    out1, out2 = list(seq1), list(seq2)
    for offset, swap in enumerate(mask):
        if swap:
            i = offset + 1
            out1[i], out2[i] = out2[i], out1[i]
    return tuple(out1), tuple(out2)


def _structurally_valid(seq: tuple[int, ...], g: MissionGraph) -> bool:
    return validate_route(Route(seq), g).structurally_valid


def uniform_crossover(
    p1: Route,
    p2: Route,
    g: MissionGraph,
    rng: int | np.random.Generator,
    mix_prob: float = 0.5,
) -> tuple[Route | None, Route | None]:
    """Uniform crossover on aligned interior gene positions.

    Parents shorter than 4 genes are skipped.  Offspring that fail the
    structural feasibility checks are discarded (returned as None).
    """
    if len(p1.sequence) < 4 or len(p2.sequence) < 4:
        return None, None
    gen = rng_from(rng)
    overlap = min(len(p1.sequence), len(p2.sequence)) - 2
    mask = gen.uniform(0.0, 1.0, overlap) < mix_prob
    s1, s2 = mix_interior_genes(p1.sequence, p2.sequence, mask.tolist())
    o1 = Route(s1) if _structurally_valid(s1, g) else None
    o2 = Route(s2) if _structurally_valid(s2, g) else None
    return o1, o2


def mutate(
    r: Route,
    kind: MutationKind,
    g: MissionGraph,
    rng: int | np.random.Generator,
) -> Route | None:
    """Apply one interior mutation; None when the result is infeasible.

    insertion moves one interior gene to another interior slot, swap
    exchanges two interior genes, inversion reverses the interior segment
    between two positions.  Endpoints never move.  Routes with fewer than
    two interior genes are returned unchanged.
    """
    if kind not in MUTATION_KINDS:
        raise InvalidParameterError(f"unknown mutation kind {kind!r}")
    seq = list(r.sequence)
    interior = len(seq) - 2
    if interior < 2:
        return r
    gen = rng_from(rng)
    i = int(gen.integers(1, interior + 1))
    j = int(gen.integers(1, interior + 1))
    if kind == "insertion":
        gene = seq.pop(i)
        seq.insert(j, gene)
    elif kind == "swap":
        seq[i], seq[j] = seq[j], seq[i]
    else:
        lo, hi = (i, j) if i <= j else (j, i)
        seq[lo : hi + 1] = reversed(seq[lo : hi + 1])
    out = tuple(seq)
    if out == r.sequence:
        return r
    return Route(out) if _structurally_valid(out, g) else None


def plan_route(
    g: MissionGraph,
    t_available: float,
    v_auv: float = DEFAULT_SPEED,
    cfg: GaConfig = GaConfig(),
    seed: int = 0,
) -> tuple[Route, GaRunStats]:
    """Search for the best within-budget route from start to destination.

    Generational loop with one elite carried over, roulette selection,
    uniform crossover and per-individual mutation; terminates after the
    configured stall length or the iteration cap.  Raises
    InfeasibleRouteError when the endpoints are disconnected or no
    within-budget route was ever seen.
    """
    if t_available <= 0.0:
        raise InvalidParameterError(f"available time must be > 0, got {t_available}")
    if not g.is_connected(g.start_id, g.dest_id):
        raise InfeasibleRouteError(
            f"waypoints {g.start_id} and {g.dest_id} are disconnected"
        )
    t0 = time.perf_counter()
    rng = np.random.default_rng(int(seed))
    weights = np.asarray(cfg.mutation_weights, dtype=np.float64)
    weights = weights / weights.sum()
    dest_index = next(i for i, wp in enumerate(g.waypoints) if wp.id == g.dest_id)

    population: list[Route] = []
    for k in range(cfg.population_size):
        pv = rng.uniform(-100.0, 100.0, g.n_waypoints)
        if k % 5 == 0:
            # Give part of the population a top-range destination priority
            # so their walks close the route early.  Crossover and mutation
            # only rearrange interiors, so route-length diversity must come
            # from initialization; without it, small budgets on dense
            # graphs are left badly underfilled.
            pv[dest_index] = rng.uniform(90.0, 100.0)
        population.append(build_feasible_route(pv, g))

    stats = GaRunStats()
    best_route: Route | None = None
    best_cost = np.inf
    feasible_route: Route | None = None
    feasible_cost = np.inf
    stall = 0

    for generation in range(cfg.max_iterations):
        costs = [route_cost(r, g, t_available, cfg, v_auv) for r in population]
        times = [route_time(r, g, v_auv) for r in population]
        gen_best = int(np.argmin(costs))

        if costs[gen_best] < best_cost:
            best_cost = costs[gen_best]
            best_route = population[gen_best]
            stall = 0
        else:
            stall += 1
        for idx, (c, t) in enumerate(zip(costs, times)):
            if t < t_available and c < feasible_cost:
                feasible_cost = c
                feasible_route = population[idx]

        stats.best_costs.append(float(best_cost))
        stats.mean_costs.append(float(np.mean(costs)))
        stats.violations.append(float(max(0.0, times[gen_best] - t_available)))
        stats.generations = generation + 1

        if stall >= cfg.stall_generations or generation == cfg.max_iterations - 1:
            break

        next_pop: list[Route] = [best_route]
        while len(next_pop) < cfg.population_size:
            p1 = population[roulette_select(costs, rng)]
            p2 = population[roulette_select(costs, rng)]
            c1, c2 = uniform_crossover(p1, p2, g, rng, cfg.crossover_mix)
            for child, parent in ((c1, p1), (c2, p2)):
                if len(next_pop) >= cfg.population_size:
                    break
                candidate = child if child is not None else parent
                if rng.uniform() < cfg.mutation_prob:
                    kind = MUTATION_KINDS[int(rng.choice(3, p=weights))]
                    mutated = mutate(candidate, kind, g, rng)
                    if mutated is not None:
                        candidate = mutated
                next_pop.append(candidate)
        population = next_pop

    if feasible_route is None:
        raise InfeasibleRouteError(
            f"no route from {g.start_id} to {g.dest_id} fits within {t_available} s"
        )

    final = feasible_route.evaluated(g, v_auv)
    stats.best_route = final
    stats.best_cost = float(feasible_cost)
    stats.route_time = float(final.route_time)
    stats.total_distance = float(route_distance(final, g))
    stats.total_weight = float(final.route_weight)
    stats.n_tasks = final.n_legs
    stats.cpu_seconds = time.perf_counter() - t0
    return final, stats
