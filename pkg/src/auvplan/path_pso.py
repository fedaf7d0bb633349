"""Local path planning: particle swarm over B-spline control points.

A candidate path is a clamped uniform B-spline pinned to the leg's start and
target waypoints.  Interior control points live in staggered boxes along the
straight connecting segment, widened laterally into a corridor.  A swarm
searches those boxes for the shortest curve whose samples stay clear of the
predicted obstacle field; collision penetration enters the cost through a
large penalty weight.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import kernels
from .graph import DEFAULT_SPEED, InvalidParameterError
from .obstacles import ObstacleField, field_timeline_arrays


@dataclass(frozen=True)
class BSplineConfig:
    """Shape of the candidate curves."""

    n_control_points: int = 8
    order: int = 3
    samples_per_curve: int = 64

    def __post_init__(self) -> None:
        if self.n_control_points < 2:
            raise InvalidParameterError("need at least 2 control points")
        if self.order < 2:
            raise InvalidParameterError("B-spline order must be >= 2")
        if self.samples_per_curve < 2 * self.n_control_points:
            raise InvalidParameterError(
                "samples_per_curve must be >= 2 * n_control_points"
            )


@dataclass(frozen=True)
class PsoConfig:
    """Swarm search parameters."""

    swarm_size: int = 150
    iterations: int = 100
    inertia: float = 0.72
    inertia_decay: bool = False  # linear 0.9 -> 0.4 instead of constant
    cognitive: float = 2.0
    social: float = 2.0
    velocity_clamp: float = 0.2  # fraction of each box width
    violation_penalty: float = 100.0
    corridor_ratio: float = 0.5  # lateral half-width as fraction of leg length
    horizon_steps: int | None = None  # None: one field step per iteration
    seed_straight: bool = True  # include the straight polygon as a particle

    def __post_init__(self) -> None:
        if self.swarm_size < 1 or self.iterations < 1:
            raise InvalidParameterError("swarm size and iterations must be >= 1")
        if not 0.0 < self.velocity_clamp <= 1.0:
            raise InvalidParameterError("velocity clamp must be in (0, 1]")
        if self.violation_penalty <= 0.0:
            raise InvalidParameterError("violation penalty must be > 0")
        if self.corridor_ratio < 0.0:
            raise InvalidParameterError("corridor ratio must be >= 0")

    def horizon(self) -> int:
        return self.iterations if self.horizon_steps is None else max(1, self.horizon_steps)


@dataclass(frozen=True)
class BSplinePath:
    """A planned leg: control points, sampled curve and its scores."""

    control_points: np.ndarray  # (n, 3)
    samples: np.ndarray  # (S, 3)
    length: float
    flight_time: float
    violation: float
    cost: float


@dataclass
class PathRunStats:
    """Per-iteration swarm traces for one planning call.

    best_costs tracks the global best (non-increasing); mean_costs averages
    the current particle positions; mean_violations averages the personal
    best states, the retained solutions whose violation converges to zero
    as collision-free paths take over the swarm memory.
    """

    best_costs: list[float] = field(default_factory=list)
    mean_costs: list[float] = field(default_factory=list)
    mean_violations: list[float] = field(default_factory=list)
    iterations: int = 0
    swarm_size: int = 0
    cpu_seconds: float = 0.0


@lru_cache(maxsize=64)
def _basis_cached(n_ctrl: int, order: int, n_samples: int) -> np.ndarray:
    degree = order - 1
    # Clamped uniform knots: `order` zeros, n_ctrl - order interior knots,
    # `order` ones; n_ctrl + order knots in total.
    interior = np.linspace(0.0, 1.0, n_ctrl - order + 2)[1:-1]
    knots = np.concatenate([np.zeros(order), interior, np.ones(order)])
    t = np.linspace(0.0, 1.0, n_samples)

    n_funcs = len(knots) - 1
    basis = np.zeros((n_samples, n_funcs))
    for i in range(n_funcs):
        basis[:, i] = (knots[i] <= t) & (t < knots[i + 1])
    basis[t >= knots[-1], n_ctrl - 1] = 1.0  # close the last span at t = 1

    for d in range(1, degree + 1):
        nxt = np.zeros((n_samples, n_funcs - d))
        for i in range(n_funcs - d):
            left_den = knots[i + d] - knots[i]
            right_den = knots[i + d + 1] - knots[i + 1]
            term = np.zeros(n_samples)
            if left_den > 0.0:
                term = (t - knots[i]) / left_den * basis[:, i]
            if right_den > 0.0:
                term = term + (knots[i + d + 1] - t) / right_den * basis[:, i + 1]
            nxt[:, i] = term
        basis = nxt

    out = basis[:, :n_ctrl].copy()
    out.setflags(write=False)
    return out


def bspline_basis(n_ctrl: int, order: int, n_samples: int) -> np.ndarray:
    """Cox-de Boor basis matrix (n_samples, n_ctrl) on a uniform parameter grid."""
    if n_ctrl < order:
        raise InvalidParameterError(
            f"need at least as many control points ({n_ctrl}) as the order ({order})"
        )
    if order < 2 or n_samples < 2:
        raise InvalidParameterError("order and sample count must be >= 2")
    return _basis_cached(int(n_ctrl), int(order), int(n_samples))


def bspline_curve(control_points: np.ndarray, cfg: BSplineConfig) -> np.ndarray:
    """Sample the curve defined by (n, 3) control points at uniform parameters."""
    pts = np.asarray(control_points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise InvalidParameterError(f"control points must be (n, 3), got {pts.shape}")
    if pts.shape[0] != cfg.n_control_points:
        raise InvalidParameterError(
            f"expected {cfg.n_control_points} control points, got {pts.shape[0]}"
        )
    basis = bspline_basis(cfg.n_control_points, cfg.order, cfg.samples_per_curve)
    return basis @ pts


def path_length(samples: np.ndarray) -> float:
    """Polyline length through the sampled curve points."""
    pts = np.asarray(samples, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise InvalidParameterError(f"samples must be (n, 3), got {pts.shape}")
    return kernels.polyline_length(pts)


def path_flight_time(samples: np.ndarray, v_auv: float = DEFAULT_SPEED) -> float:
    """Traversal time of the sampled curve at constant speed."""
    if v_auv <= 0.0:
        raise InvalidParameterError(f"vehicle speed must be > 0, got {v_auv}")
    return path_length(samples) / v_auv


def control_point_bounds(
    start: Sequence[float],
    target: Sequence[float],
    n_ctrl: int,
    corridor_ratio: float = 0.5,
) -> tuple[np.ndarray, np.ndarray]:
    """Staggered per-control-point search boxes along the leg.

    The straight segment is divided at n_ctrl - 1 evenly spaced points;
    interior control point i is boxed between division points i-1 and i,
    then widened per axis by the corridor half-width scaled by how
    perpendicular that axis is to the track.  Endpoints are pinned: their
    lower and upper bounds coincide.
    """
    a = np.asarray(start, dtype=np.float64)
    b = np.asarray(target, dtype=np.float64)
    if a.shape != (3,) or b.shape != (3,):
        raise InvalidParameterError("start and target must be 3-vectors")
    if n_ctrl < 2:
        raise InvalidParameterError("need at least 2 control points")
    dist = float(np.linalg.norm(b - a))
    if dist <= 0.0:
        raise InvalidParameterError("start and target must be distinct")

    track = (b - a) / dist
    half_width = corridor_ratio * dist
    lateral = half_width * (1.0 - np.abs(track))

    fractions = np.linspace(0.0, 1.0, n_ctrl)
    divisions = a[None, :] + fractions[:, None] * (b - a)[None, :]

    lower = np.empty((n_ctrl, 3))
    upper = np.empty((n_ctrl, 3))
    lower[0] = upper[0] = a
    lower[-1] = upper[-1] = b
    for i in range(1, n_ctrl - 1):
        lo = np.minimum(divisions[i - 1], divisions[i])
        hi = np.maximum(divisions[i - 1], divisions[i])
        lower[i] = lo - lateral
        upper[i] = hi + lateral
    return lower, upper


def _collision_step_indices(n_samples: int, horizon: int) -> np.ndarray:
    # Sample j is checked against the field predicted ceil(j * H / S) steps
    # ahead, tying curve progress to obstacle time.
    j = np.arange(n_samples)
    return np.ceil(j * horizon / n_samples).astype(np.int64)


def _timeline(field_: ObstacleField, horizon: int) -> tuple[np.ndarray, np.ndarray]:
    if field_.n_obstacles == 0:
        return np.zeros((horizon + 1, 0, 3)), np.zeros((horizon + 1, 0))
    return field_timeline_arrays(field_, horizon)


def path_cost(
    path: BSplinePath | np.ndarray,
    field_: ObstacleField,
    pso_cfg: PsoConfig = PsoConfig(),
) -> tuple[float, float]:
    """Score a path against a field: (cost, violation).

    Cost is flight time normalized by the straight-line flight time between
    the path's endpoints, plus the penalty-weighted violation; the speed
    cancels in the ratio, so the cost is purely geometric.
    """
    samples = path.samples if isinstance(path, BSplinePath) else np.asarray(path, float)
    if samples.ndim != 2 or samples.shape[1] != 3:
        raise InvalidParameterError(f"path samples must be (n, 3), got {samples.shape}")
    straight = float(np.linalg.norm(samples[-1] - samples[0]))
    if straight <= 0.0:
        raise InvalidParameterError("path endpoints must be distinct")
    horizon = pso_cfg.horizon()
    centers, radii = _timeline(field_, horizon)
    step_idx = _collision_step_indices(samples.shape[0], horizon)
    violation = kernels.timed_violation(samples, centers, radii, step_idx)
    cost = kernels.polyline_length(samples) / straight + pso_cfg.violation_penalty * violation
    return cost, violation


def plan_path(
    start: Sequence[float],
    target: Sequence[float],
    field_: ObstacleField,
    bspline_cfg: BSplineConfig = BSplineConfig(),
    pso_cfg: PsoConfig = PsoConfig(),
    seed: int = 0,
    v_auv: float = DEFAULT_SPEED,
) -> tuple[BSplinePath, PathRunStats]:
    """Plan one leg with a particle swarm over interior control points.

    Every particle keeps its personal best; the global best over personal
    bests is recorded each iteration, so the best-cost trace never
    increases.  Positions stay clamped inside the control point boxes and
    velocities inside the configured fraction of each box width.
    """
    if v_auv <= 0.0:
        raise InvalidParameterError(f"vehicle speed must be > 0, got {v_auv}")
    t0 = time.perf_counter()
    a = np.asarray(start, dtype=np.float64)
    b = np.asarray(target, dtype=np.float64)
    n_ctrl = bspline_cfg.n_control_points
    lower, upper = control_point_bounds(a, b, n_ctrl, pso_cfg.corridor_ratio)
    basis = bspline_basis(n_ctrl, bspline_cfg.order, bspline_cfg.samples_per_curve)

    horizon = pso_cfg.horizon()
    centers, radii = _timeline(field_, horizon)
    step_idx = _collision_step_indices(bspline_cfg.samples_per_curve, horizon)
    straight = float(np.linalg.norm(b - a))

    rng = np.random.default_rng(int(seed))
    n_pop = pso_cfg.swarm_size
    width = upper - lower
    pos = lower[None, :, :] + rng.uniform(0.0, 1.0, (n_pop, n_ctrl, 3)) * width[None, :, :]
    if pso_cfg.seed_straight:
        fractions = np.linspace(0.0, 1.0, n_ctrl)
        pos[0] = a[None, :] + fractions[:, None] * (b - a)[None, :]
    v_max = pso_cfg.velocity_clamp * width
    vel = rng.uniform(-1.0, 1.0, (n_pop, n_ctrl, 3)) * v_max[None, :, :]

    pbest_pos = pos.copy()
    pbest_cost = np.full(n_pop, np.inf)
    pbest_violation = np.full(n_pop, np.inf)
    stats = PathRunStats(iterations=pso_cfg.iterations, swarm_size=n_pop)

    gbest_idx = 0
    for it in range(pso_cfg.iterations):
        lengths, violations = kernels.evaluate_swarm(basis, pos, centers, radii, step_idx)
        costs = lengths / straight + pso_cfg.violation_penalty * violations

        improved = costs < pbest_cost
        pbest_cost = np.where(improved, costs, pbest_cost)
        pbest_violation = np.where(improved, violations, pbest_violation)
        pbest_pos[improved] = pos[improved]
        gbest_idx = int(np.argmin(pbest_cost))

        stats.best_costs.append(float(pbest_cost[gbest_idx]))
        stats.mean_costs.append(float(costs.mean()))
        stats.mean_violations.append(float(pbest_violation.mean()))

        if it == pso_cfg.iterations - 1:
            break
        if pso_cfg.inertia_decay:
            frac = it / max(1, pso_cfg.iterations - 1)
            omega = 0.9 + (0.4 - 0.9) * frac
        else:
            omega = pso_cfg.inertia
        r1 = rng.uniform(0.0, 1.0, (n_pop, n_ctrl, 3))
        r2 = rng.uniform(0.0, 1.0, (n_pop, n_ctrl, 3))
        vel = (
            omega * vel
            + pso_cfg.cognitive * r1 * (pbest_pos - pos)
            + pso_cfg.social * r2 * (pbest_pos[gbest_idx][None, :, :] - pos)
        )
        vel = np.clip(vel, -v_max[None, :, :], v_max[None, :, :])
        pos = np.clip(pos + vel, lower[None, :, :], upper[None, :, :])

    best_ctrl = pbest_pos[gbest_idx].copy()
    samples = basis @ best_ctrl
    length = kernels.polyline_length(samples)
    violation = kernels.timed_violation(samples, centers, radii, step_idx)
    cost = length / straight + pso_cfg.violation_penalty * violation
    path = BSplinePath(
        control_points=best_ctrl,
        samples=samples,
        length=float(length),
        flight_time=float(length) / v_auv,
        violation=float(violation),
        cost=float(cost),
    )
    stats.cpu_seconds = time.perf_counter() - t0
    return path, stats
