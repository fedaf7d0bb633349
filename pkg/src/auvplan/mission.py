"""Mission execution: alternate global route and local path planning.

A mission runs the route planner on the remaining network and budget, then
flies the route leg by leg.  Each leg gets a fresh obstacle field inside an
inflated window around its waypoint pair and a swarm-planned path through
it.  Realized leg time is compared against the nominal leg time the route
was scored with; the moment a leg runs over, the remaining route is dropped
and the route planner is called again from the current waypoint.  Traversed
edges are pruned so no edge is flown twice.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .graph import DEFAULT_SPEED, Edge, InvalidParameterError, MissionGraph
from .obstacles import (
    ObstacleField,
    ObstacleParams,
    OperationWindow,
    make_operation_window,
    scenario_counts,
    spawn_obstacles,
)
from .path_pso import BSplineConfig, PathRunStats, PsoConfig, plan_path
from .route_ga import GaConfig, GaRunStats, InfeasibleRouteError, plan_route
from .seeding import DOMAIN_FIELD, DOMAIN_GA, DOMAIN_PSO, derive_seed

# Relative slack on the nominal leg time before a replan triggers; wide
# enough to absorb float noise on an exactly straight flight, far below any
# genuine detour.
EXPECTED_TIME_SLACK = 1.0e-9

# Fraction of the remaining budget withheld from the route planner so
# realized detours do not strand the vehicle.
BUDGET_RESERVE = 0.03

FieldGenerator = Callable[[OperationWindow, int], ObstacleField]


class Decision(enum.Enum):
    CONTINUE = "continue"
    REPLAN = "replan"


def expected_time(e: Edge, v_auv: float = DEFAULT_SPEED) -> float:
    """Nominal leg time the route planner scored: cruise plus task time."""
    if v_auv <= 0.0:
        raise InvalidParameterError(f"vehicle speed must be > 0, got {v_auv}")
    return e.distance / v_auv + e.task.completion_time


def replan_check(t_path_flight: float, t_expected: float) -> Decision:
    """Replan exactly when the realized leg time exceeds the expected one."""
    return Decision.REPLAN if t_path_flight > t_expected else Decision.CONTINUE


@dataclass(frozen=True)
class GrpRecord:
    """One route planner call, mirroring the mission log route table."""

    call_no: int
    start: int
    dest: int
    n_tasks: int
    weight: float
    cost: float
    cpu: float  # charged compute time, deterministic
    t_available: float  # remaining budget when the call was made
    t_route: float
    valid: bool
    sequence: tuple[int, ...]


@dataclass(frozen=True)
class LegRecord:
    """One flown leg, mirroring the mission log path table."""

    route_id: int
    call_index: int  # position of this leg within its route, 1-based
    edge: tuple[int, int]
    violation: float
    cost: float
    cpu: float  # charged compute time, deterministic
    t_path_flight: float
    t_expected: float
    t_available_after: float
    replan_flag: int
    lpp_flag: int


@dataclass(frozen=True)
class MissionState:
    """Vehicle state between legs; treat as a value."""

    working_graph: MissionGraph
    current: int
    t_available: float
    legs: tuple[LegRecord, ...] = ()

    @property
    def failed(self) -> bool:
        return self.t_available < 0.0


@dataclass
class MissionLog:
    """Complete record of one mission."""

    success: bool = False
    reason: str = ""
    t_budget: float = 0.0
    remaining_time: float = 0.0
    final_sequence: tuple[int, ...] = ()
    grp_records: list[GrpRecord] = field(default_factory=list)
    leg_records: list[LegRecord] = field(default_factory=list)
    ga_traces: list[GaRunStats] = field(default_factory=list)
    path_traces: list[PathRunStats] = field(default_factory=list)
    path_samples: list[np.ndarray] = field(default_factory=list)

    @property
    def replan_count(self) -> int:
        return sum(1 for leg in self.leg_records if leg.replan_flag == 1)


def apply_leg(state: MissionState, leg: LegRecord) -> MissionState:
    """Advance the state over one flown leg.

    Decrements the budget by the leg's realized time, prunes the traversed
    edge, moves the current waypoint and appends the record.  A budget
    under-run yields a failed state, not an exception.
    """
    a, b = leg.edge
    if a != state.current:
        raise InvalidParameterError(f"leg departs from {a} but vehicle is at {state.current}")
    if not state.working_graph.has_edge(a, b):
        raise InvalidParameterError(f"leg edge {a}-{b} is not in the working graph")
    return MissionState(
        working_graph=state.working_graph.without_edges([(a, b)]),
        current=b,
        t_available=state.t_available - leg.t_path_flight,
        legs=state.legs + (leg,),
    )


def make_field_generator(
    scenario: int = 4,
    count_range: tuple[int, int] = (3, 6),
    params: ObstacleParams = ObstacleParams(),
) -> FieldGenerator:
    """Per-leg obstacle field factory for the four benchmark scenarios."""
    lo, hi = count_range
    if lo < 0 or hi < lo:
        raise InvalidParameterError(f"bad obstacle count range {count_range}")

    def generate(window: OperationWindow, leg_seed: int) -> ObstacleField:
        rng = np.random.default_rng(derive_seed(leg_seed, 0))
        total = int(rng.integers(lo, hi + 1))
        counts = scenario_counts(scenario, total, rng)
        return spawn_obstacles(window, counts, derive_seed(leg_seed, 1), params)

    return generate


def empty_field_generator(window: OperationWindow, leg_seed: int) -> ObstacleField:
    """Obstacle-free fields, for calibration runs."""
    return spawn_obstacles(window, {}, leg_seed)


def run_mission(
    g: MissionGraph,
    field_generator: FieldGenerator,
    ga_cfg: GaConfig = GaConfig(),
    pso_cfg: PsoConfig = PsoConfig(),
    v_auv: float = DEFAULT_SPEED,
    t_available: float = 10800.0,
    seed: int = 0,
    bspline_cfg: BSplineConfig = BSplineConfig(),
    compute_charge: float = 0.0,
    window_inflation: float = 0.25,
    window_min_pad: float = 150.0,
    budget_reserve: float = BUDGET_RESERVE,
) -> MissionLog:
    """Fly a full mission with interleaved route and path planning.

    compute_charge is the synthetic planner time added to every leg's
    realized time (per planner call); zero keeps missions fully
    deterministic.  budget_reserve is withheld from each route planner call
    as detour headroom.
    """
    if t_available <= 0.0:
        raise InvalidParameterError(f"available time must be > 0, got {t_available}")
    if not 0.0 <= budget_reserve < 1.0:
        raise InvalidParameterError(f"budget reserve must be in [0, 1), got {budget_reserve}")

    log = MissionLog(t_budget=t_available)
    state = MissionState(
        working_graph=g.with_start(g.start_id),
        current=g.start_id,
        t_available=t_available,
    )
    visited = [g.start_id]
    leg_counter = 0
    grp_call = 0

    while True:
        if state.current == g.dest_id:
            log.success = True
            log.reason = "destination reached"
            break

        working = state.working_graph.with_start(state.current)
        if not working.is_connected(state.current, g.dest_id):
            log.reason = (
                f"no remaining edges connect {state.current} to {g.dest_id}"
            )
            break

        planning_budget = state.t_available * (1.0 - budget_reserve)
        if planning_budget <= 0.0:
            log.reason = "available time exhausted before planning"
            break

        grp_call += 1
        try:
            route, ga_stats = plan_route(
                working,
                planning_budget,
                v_auv,
                ga_cfg,
                derive_seed(seed, DOMAIN_GA, grp_call),
            )
        except InfeasibleRouteError as exc:
            log.reason = f"route planning failed: {exc}"
            break
        log.ga_traces.append(ga_stats)
        log.grp_records.append(
            GrpRecord(
                call_no=grp_call,
                start=state.current,
                dest=g.dest_id,
                n_tasks=ga_stats.n_tasks,
                weight=ga_stats.total_weight,
                cost=ga_stats.best_cost,
                cpu=compute_charge,
                t_available=state.t_available,
                t_route=ga_stats.route_time,
                valid=True,
                sequence=route.sequence,
            )
        )
        pending_grp_charge = compute_charge

        replanned = False
        for leg_index, (a, b) in enumerate(route.legs()):
            edge = state.working_graph.edge_between(a, b)
            wp_a = state.working_graph.waypoint(a)
            wp_b = state.working_graph.waypoint(b)
            window = make_operation_window(wp_a, wp_b, window_inflation, window_min_pad)
            leg_counter += 1
            field_ = field_generator(window, derive_seed(seed, DOMAIN_FIELD, leg_counter))
            path, path_stats = plan_path(
                wp_a.coords(),
                wp_b.coords(),
                field_,
                bspline_cfg,
                pso_cfg,
                derive_seed(seed, DOMAIN_PSO, leg_counter),
                v_auv,
            )
            log.path_traces.append(path_stats)
            log.path_samples.append(path.samples)

            charged = compute_charge + pending_grp_charge
            pending_grp_charge = 0.0
            t_path_flight = path.flight_time + edge.task.completion_time + charged
            t_expected = expected_time(edge, v_auv) * (1.0 + EXPECTED_TIME_SLACK)
            decision = replan_check(t_path_flight, t_expected)
            replan_flag = 1 if decision is Decision.REPLAN else 0
            legs_after = route.n_legs - (leg_index + 1)
            lpp_flag = 1 if replan_flag == 0 and legs_after >= 2 else 0

            leg = LegRecord(
                route_id=grp_call,
                call_index=leg_index + 1,
                edge=(a, b),
                violation=path.violation,
                cost=path.cost,
                cpu=charged,
                t_path_flight=t_path_flight,
                t_expected=t_expected,
                t_available_after=state.t_available - t_path_flight,
                replan_flag=replan_flag,
                lpp_flag=lpp_flag,
            )
            state = apply_leg(state, leg)
            log.leg_records.append(leg)
            visited.append(b)

            if state.failed:
                log.reason = "available time under-run while flying a leg"
                break
            if state.current == g.dest_id or decision is Decision.REPLAN:
                replanned = decision is Decision.REPLAN
                break
        if state.failed:
            break
        if state.current == g.dest_id:
            log.success = True
            log.reason = "destination reached"
            break
        if not replanned:
            # Route exhausted without reaching the destination; should not
            # happen for validated routes, but fail loudly if it does.
            log.reason = "route ended away from the destination"
            break

    log.remaining_time = state.t_available
    log.final_sequence = tuple(visited)
    return log
