"""Obstacle fields inside per-leg operation windows.

Four obstacle kinds share one record: a fixed sphere, a sphere whose radius
is redrawn every step, a drifting sphere, and a current-driven sphere that
both drifts and grows an uncertainty halo at a rate set by the water current
magnitude.  Stepping is stochastic but fully seeded; prediction rolls the
field forward deterministically at the noise means so planners can score
candidate paths against a frozen timeline.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Mapping, Sequence

import numpy as np

from . import kernels
from .graph import InvalidParameterError, Waypoint
from .seeding import derive_seed

# Scale of the scalar noise state driving halo growth.  With sigma_0 =
# sqrt(pi/2) the folded noise has unit mean, so the halo grows by exactly
# the current magnitude per step in expectation.
HALO_NOISE_SIGMA = math.sqrt(math.pi / 2.0)


class SpawnError(RuntimeError):
    """Raised when an operation window cannot accommodate an obstacle."""


class ObstacleKind(enum.Enum):
    STATIC_KNOWN = "static-known"
    STATIC_UNCERTAIN = "static-uncertain"
    SELF_MOTIVATED = "self-motivated"
    CURRENT_DRIVEN = "current-driven"


STATIC_KINDS = (ObstacleKind.STATIC_KNOWN, ObstacleKind.STATIC_UNCERTAIN)
MOVING_KINDS = (ObstacleKind.SELF_MOTIVATED, ObstacleKind.CURRENT_DRIVEN)


@dataclass(frozen=True)
class OperationWindow:
    """Axis-aligned box bounding one leg's obstacle activity.

    anchors are the waypoints the window was built around; spawned
    obstacles must keep clear of them so a collision-free leg exists.
    """

    lower: tuple[float, float, float]
    upper: tuple[float, float, float]
    anchors: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self) -> None:
        for lo, hi in zip(self.lower, self.upper):
            if not hi > lo:
                raise InvalidParameterError(f"window has non-positive extent: {self}")

    @property
    def extent(self) -> tuple[float, float, float]:
        return tuple(hi - lo for lo, hi in zip(self.lower, self.upper))

    @property
    def midpoint(self) -> tuple[float, float, float]:
        return tuple((lo + hi) / 2.0 for lo, hi in zip(self.lower, self.upper))

    @property
    def min_extent(self) -> float:
        return min(self.extent)

    def contains(self, point: Sequence[float]) -> bool:
        return all(lo <= p <= hi for p, lo, hi in zip(point, self.lower, self.upper))


def make_operation_window(
    a: Waypoint | Sequence[float],
    b: Waypoint | Sequence[float],
    inflation: float = 0.25,
    min_pad: float = 150.0,
) -> OperationWindow:
    """Box around a waypoint pair, inflated per axis.

    Each axis grows by inflation times its span, but never less than min_pad,
    so degenerate axes (equal coordinates) still yield a usable box.
    """
    pa = a.coords() if isinstance(a, Waypoint) else tuple(float(x) for x in a)
    pb = b.coords() if isinstance(b, Waypoint) else tuple(float(x) for x in b)
    lower = []
    upper = []
    for x, y in zip(pa, pb):
        lo, hi = (x, y) if x <= y else (y, x)
        pad = max(inflation * (hi - lo), min_pad)
        lower.append(lo - pad)
        upper.append(hi + pad)
    return OperationWindow(tuple(lower), tuple(upper), anchors=(pa, pb))


@dataclass(frozen=True)
class ObstacleParams:
    """Sampling parameters for obstacle spawning and stepping."""

    radius_sigma: float = 100.0
    radius_min: float = 10.0
    radius_max: float = 300.0
    radius_band: float = 0.25  # relative bound for per-step radius resampling
    motion_sigma: float = 10.0  # per-axis drift per step, metres
    current_sigma: float = 0.3  # spread of the water current magnitude draw
    anchor_clearance: float = 150.0  # keep-out margin around window anchors
    max_spawn_tries: int = 1000

    def __post_init__(self) -> None:
        if self.radius_min <= 0 or self.radius_max < self.radius_min:
            raise InvalidParameterError("bad radius range")
        if not 0.0 <= self.radius_band < 1.0:
            raise InvalidParameterError("radius band must be in [0, 1)")


@dataclass(frozen=True)
class Obstacle:
    """One spherical obstacle with its uncertainty state."""

    kind: ObstacleKind
    position: tuple[float, float, float]
    radius: float
    base_radius: float
    radius_bound: tuple[float, float]
    halo: float  # accumulated uncertainty radius
    noise_state: float  # scalar noise X driving halo growth
    stream_seed: int

    @property
    def effective_radius(self) -> float:
        return self.radius + self.halo


@dataclass(frozen=True)
class ObstacleField:
    """Immutable snapshot of all obstacles in one operation window."""

    obstacles: tuple[Obstacle, ...]
    window: OperationWindow
    current_magnitude: float
    params: ObstacleParams
    step_index: int = 0

    @property
    def n_obstacles(self) -> int:
        return len(self.obstacles)

    def centers_array(self) -> np.ndarray:
        return np.array([o.position for o in self.obstacles], dtype=np.float64).reshape(
            self.n_obstacles, 3
        )

    def effective_radii(self) -> np.ndarray:
        return np.array([o.effective_radius for o in self.obstacles], dtype=np.float64)


def _anchor_span(window: OperationWindow) -> float:
    if len(window.anchors) < 2:
        return max(window.extent)
    a = np.asarray(window.anchors[0], dtype=np.float64)
    b = np.asarray(window.anchors[1], dtype=np.float64)
    return float(np.sqrt(((a - b) ** 2).sum()))


def _draw_radius(rng: np.random.Generator, params: ObstacleParams, window: OperationWindow) -> float:
    # Cap the radius so the center interval inset by the radius stays open on
    # every window axis, and so a single sphere can never blanket the whole
    # leg between the anchors.
    cap = 0.49 * window.min_extent
    if window.anchors:
        cap = min(cap, 0.2 * _anchor_span(window))
    if cap <= 0.0:
        raise SpawnError(f"window too thin for any obstacle: {window}")
    r = min(abs(rng.normal(0.0, params.radius_sigma)), params.radius_max, cap)
    return max(r, min(params.radius_min, cap))


def _draw_truncated(
    rng: np.random.Generator, lo: float, hi: float, mid: float, scale: float, max_tries: int
) -> float:
    for _ in range(max_tries):
        c = rng.normal(mid, scale)
        if lo < c < hi:
            return float(c)
    raise SpawnError("placement rejection sampling exhausted")


def _draw_center(
    rng: np.random.Generator,
    window: OperationWindow,
    radius: float,
    clearance: float,
    max_tries: int,
) -> tuple[float, float, float]:
    # Truncated normal per axis (mid-window, spread a quarter extent) inset
    # by the radius; the joint draw is retried while it lands inside a
    # keep-out ball around a window anchor, so waypoints are never swallowed.
    for lo, hi in zip(window.lower, window.upper):
        if hi - radius <= lo + radius:
            raise SpawnError(
                f"radius {radius:.1f} cannot fit inside window axis [{lo:.1f}, {hi:.1f}]"
            )
    anchors = np.asarray(window.anchors, dtype=np.float64).reshape(-1, 3)
    keep_out = radius + clearance
    for _ in range(max_tries):
        center = np.array(
            [
                _draw_truncated(rng, lo + radius, hi - radius, mid, ext / 4.0, max_tries)
                for lo, hi, mid, ext in zip(
                    window.lower, window.upper, window.midpoint, window.extent
                )
            ]
        )
        if anchors.size and np.any(
            ((anchors - center) ** 2).sum(axis=1) <= keep_out**2
        ):
            continue
        return (float(center[0]), float(center[1]), float(center[2]))
    raise SpawnError("placement rejection sampling exhausted")


def spawn_obstacles(
    window: OperationWindow,
    counts: Mapping[ObstacleKind, int],
    seed: int,
    params: ObstacleParams = ObstacleParams(),
    current_magnitude: float | None = None,
) -> ObstacleField:
    """Populate a window with the requested number of obstacles per kind.

    Radii are folded-normal draws clamped to the configured range and the
    window capacity; centers are rejection-sampled truncated normals inset
    by each radius.  The water current magnitude is drawn once per field
    unless given explicitly.
    """
    for kind, n in counts.items():
        if n < 0:
            raise InvalidParameterError(f"negative count for {kind}")
    rng = np.random.default_rng(int(seed))
    if current_magnitude is None:
        current_magnitude = float(abs(rng.normal(0.0, params.current_sigma)))
    elif current_magnitude < 0.0:
        raise InvalidParameterError("current magnitude must be >= 0")

    # Clearance shrinks with the leg so short hops still admit obstacles.
    clearance = (
        min(params.anchor_clearance, 0.1 * _anchor_span(window))
        if window.anchors
        else 0.0
    )
    obstacles: list[Obstacle] = []
    index = 0
    for kind in ObstacleKind:
        for _ in range(int(counts.get(kind, 0))):
            radius = _draw_radius(rng, params, window)
            position = _draw_center(rng, window, radius, clearance, params.max_spawn_tries)
            band = params.radius_band * radius
            noise = (
                float(rng.normal(0.0, HALO_NOISE_SIGMA))
                if kind is ObstacleKind.CURRENT_DRIVEN
                else 0.0
            )
            obstacles.append(
                Obstacle(
                    kind=kind,
                    position=position,
                    radius=radius,
                    base_radius=radius,
                    radius_bound=(radius - band, radius + band),
                    halo=0.0,
                    noise_state=noise,
                    stream_seed=derive_seed(seed, index),
                )
            )
            index += 1
    return ObstacleField(
        obstacles=tuple(obstacles),
        window=window,
        current_magnitude=current_magnitude,
        params=params,
        step_index=0,
    )


def _step_one(
    obs: Obstacle,
    rng: np.random.Generator,
    params: ObstacleParams,
    current_magnitude: float,
) -> Obstacle:
    if obs.kind is ObstacleKind.STATIC_KNOWN:
        return obs
    if obs.kind is ObstacleKind.STATIC_UNCERTAIN:
        lo, hi = obs.radius_bound
        r = float(np.clip(rng.normal(obs.base_radius, params.radius_band * obs.base_radius), lo, hi))
        return replace(obs, radius=r)
    # Both moving kinds drift with zero-mean per-axis steps.
    drift = rng.normal(0.0, params.motion_sigma, 3)
    position = tuple(p + float(d) for p, d in zip(obs.position, drift))
    if obs.kind is ObstacleKind.SELF_MOTIVATED:
        return replace(obs, position=position)
    # Current-driven: halo grows by current magnitude times the folded noise
    # state from the previous step; the noise also nudges the position along
    # a random direction before being redrawn.
    halo = obs.halo + current_magnitude * abs(obs.noise_state)
    direction = rng.normal(0.0, 1.0, 3)
    norm = float(np.sqrt((direction * direction).sum()))
    if norm > 0.0:
        position = tuple(
            p + obs.noise_state * float(d) / norm for p, d in zip(position, direction)
        )
    noise = float(rng.normal(0.0, HALO_NOISE_SIGMA))
    return replace(obs, position=position, halo=halo, noise_state=noise)


def step_obstacles(field: ObstacleField, step_seed: int | None = None) -> ObstacleField:
    """Advance the field one stochastic step.

    Each obstacle draws from its own stream keyed by (spawn stream, step
    index), so identical (seed, step count) pairs reproduce bit-identical
    fields regardless of call pattern.
    """
    salt = field.step_index if step_seed is None else int(step_seed)
    stepped = []
    for obs in field.obstacles:
        rng = np.random.default_rng(derive_seed(obs.stream_seed, salt))
        stepped.append(_step_one(obs, rng, field.params, field.current_magnitude))
    return replace(field, obstacles=tuple(stepped), step_index=field.step_index + 1)


def _predict_one(obs: Obstacle, steps_ahead: int, current_magnitude: float) -> Obstacle:
    if obs.kind is ObstacleKind.STATIC_KNOWN:
        return obs
    if obs.kind is ObstacleKind.STATIC_UNCERTAIN:
        # Conservative envelope: assume the redrawn radius sits at its bound.
        return replace(obs, radius=obs.radius_bound[1])
    if obs.kind is ObstacleKind.SELF_MOTIVATED:
        # Drift is zero-mean; the mean prediction keeps the position.
        return obs
    halo = obs.halo + steps_ahead * current_magnitude
    return replace(obs, halo=halo, noise_state=0.0)


def predict_states(field: ObstacleField, horizon: int) -> list[ObstacleField]:
    """Deterministic mean rollout of the field for the next `horizon` steps."""
    if horizon < 1:
        raise InvalidParameterError(f"prediction horizon must be >= 1, got {horizon}")
    out = []
    for k in range(1, horizon + 1):
        obstacles = tuple(
            _predict_one(o, k, field.current_magnitude) for o in field.obstacles
        )
        out.append(replace(field, obstacles=obstacles, step_index=field.step_index + k))
    return out


def field_timeline_arrays(
    field: ObstacleField, horizon: int
) -> tuple[np.ndarray, np.ndarray]:
    """Stack the current field and its mean prediction into kernel inputs.

    Returns centers (horizon+1, N, 3) and effective radii (horizon+1, N);
    index 0 is the field as it stands, index k its k-step-ahead prediction.
    """
    snapshots = [field] + (predict_states(field, horizon) if horizon >= 1 else [])
    centers = np.stack([snap.centers_array() for snap in snapshots], axis=0)
    radii = np.stack([snap.effective_radii() for snap in snapshots], axis=0)
    return centers, radii


def collision_violation(samples: np.ndarray, field: ObstacleField) -> float:
    """Penetration measure of sample points against the field as it stands.

    Zero iff every sample lies outside every obstacle's effective radius;
    otherwise each penetrating (sample, obstacle) pair adds its normalized
    depth (R_eff - dist) / R_eff.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] != 3:
        raise InvalidParameterError(f"samples must be (n, 3), got {samples.shape}")
    if field.n_obstacles == 0:
        return 0.0
    centers = field.centers_array()[None, :, :]
    radii = field.effective_radii()[None, :]
    step_idx = np.zeros(samples.shape[0], dtype=np.int64)
    return kernels.timed_violation(samples, centers, radii, step_idx)


def scenario_counts(
    scenario: int, total: int, rng: np.random.Generator
) -> dict[ObstacleKind, int]:
    """Split an obstacle count over kinds for the four benchmark scenarios.

    1: the two static kinds only; 2: drifting obstacles; 3: current-driven
    obstacles; 4: a random mix of all four kinds.
    """
    if total < 0:
        raise InvalidParameterError("obstacle total must be >= 0")
    if scenario == 1:
        kinds = STATIC_KINDS
    elif scenario == 2:
        return {ObstacleKind.SELF_MOTIVATED: total}
    elif scenario == 3:
        return {ObstacleKind.CURRENT_DRIVEN: total}
    elif scenario == 4:
        kinds = tuple(ObstacleKind)
    else:
        raise InvalidParameterError(f"scenario must be 1..4, got {scenario}")
    counts = {kind: 0 for kind in kinds}
    for _ in range(total):
        counts[kinds[int(rng.integers(0, len(kinds)))]] += 1
    return counts
