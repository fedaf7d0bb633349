"""Hot numeric kernels with a numba backend and a pure-numpy fallback.

The path planner evaluates thousands of candidate curves per call: sample a
B-spline from control points, measure its polyline length, and accumulate
collision penetration against a time-indexed obstacle field.  Both backends
implement identical semantics; select one with the AUVPLAN_BACKEND
environment variable ("numba" or "numpy", default numba when importable).
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return deco


ENV_FLAG = "AUVPLAN_BACKEND"


# ---------------------------------------------------------------------------
# numpy implementations


def polyline_length_numpy(points: np.ndarray) -> float:
    """Sum of straight segment lengths through consecutive sample points."""
    if points.shape[0] < 2:
        return 0.0
    seg = np.diff(points, axis=0)
    return float(np.sqrt((seg * seg).sum(axis=1)).sum())


def timed_violation_numpy(
    points: np.ndarray,
    centers: np.ndarray,
    radii: np.ndarray,
    step_idx: np.ndarray,
) -> float:
    """Penetration measure of sample points against a field timeline.

    Sample j is checked against field snapshot step_idx[j].  Each
    (sample, obstacle) pair inside an effective radius R contributes
    (R - dist) / R; contributions add up.
    """
    if centers.shape[1] == 0:
        return 0.0
    c = centers[step_idx]  # (S, N, 3)
    r = radii[step_idx]  # (S, N)
    d = np.sqrt(((points[:, None, :] - c) ** 2).sum(axis=2))
    pen = (r - d) / r
    return float(np.where(pen > 0.0, pen, 0.0).sum())


def evaluate_swarm_numpy(
    basis: np.ndarray,
    control_points: np.ndarray,
    centers: np.ndarray,
    radii: np.ndarray,
    step_idx: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Lengths and violations for a whole swarm of control-point sets.

    basis is (S, n), control_points (P, n, 3); the sampled curves are
    basis @ control_points per particle.  Returns (lengths, violations),
    each shaped (P,).
    """
    curves = np.einsum("sn,pnc->psc", basis, control_points)
    seg = np.diff(curves, axis=1)
    lengths = np.sqrt((seg * seg).sum(axis=2)).sum(axis=1)
    n_obs = centers.shape[1]
    if n_obs == 0:
        return lengths, np.zeros(curves.shape[0])
    c = centers[step_idx]  # (S, N, 3)
    r = radii[step_idx]  # (S, N)
    d = np.sqrt(((curves[:, :, None, :] - c[None, :, :, :]) ** 2).sum(axis=3))
    pen = (r[None, :, :] - d) / r[None, :, :]
    violations = np.where(pen > 0.0, pen, 0.0).sum(axis=(1, 2))
    return lengths, violations


# ---------------------------------------------------------------------------
# numba implementations


@njit(cache=True)
def _polyline_length_jit(points):
    total = 0.0
    for j in range(points.shape[0] - 1):
        dx = points[j + 1, 0] - points[j, 0]
        dy = points[j + 1, 1] - points[j, 1]
        dz = points[j + 1, 2] - points[j, 2]
        total += (dx * dx + dy * dy + dz * dz) ** 0.5
    return total


@njit(cache=True)
def _timed_violation_jit(points, centers, radii, step_idx):
    total = 0.0
    n_obs = centers.shape[1]
    for j in range(points.shape[0]):
        t = step_idx[j]
        for k in range(n_obs):
            dx = points[j, 0] - centers[t, k, 0]
            dy = points[j, 1] - centers[t, k, 1]
            dz = points[j, 2] - centers[t, k, 2]
            dist = (dx * dx + dy * dy + dz * dz) ** 0.5
            r = radii[t, k]
            if dist < r:
                total += (r - dist) / r
    return total


@njit(cache=True)
def _evaluate_swarm_jit(basis, control_points, centers, radii, step_idx):
    n_pop = control_points.shape[0]
    n_samples = basis.shape[0]
    n_ctrl = basis.shape[1]
    n_obs = centers.shape[1]
    lengths = np.zeros(n_pop)
    violations = np.zeros(n_pop)
    curve = np.empty((n_samples, 3))
    for p in range(n_pop):
        for j in range(n_samples):
            x = 0.0
            y = 0.0
            z = 0.0
            for i in range(n_ctrl):
                b = basis[j, i]
                x += b * control_points[p, i, 0]
                y += b * control_points[p, i, 1]
                z += b * control_points[p, i, 2]
            curve[j, 0] = x
            curve[j, 1] = y
            curve[j, 2] = z
        total_len = 0.0
        for j in range(n_samples - 1):
            dx = curve[j + 1, 0] - curve[j, 0]
            dy = curve[j + 1, 1] - curve[j, 1]
            dz = curve[j + 1, 2] - curve[j, 2]
            total_len += (dx * dx + dy * dy + dz * dz) ** 0.5
        lengths[p] = total_len
        viol = 0.0
        for j in range(n_samples):
            t = step_idx[j]
            for k in range(n_obs):
                dx = curve[j, 0] - centers[t, k, 0]
                dy = curve[j, 1] - centers[t, k, 1]
                dz = curve[j, 2] - centers[t, k, 2]
                dist = (dx * dx + dy * dy + dz * dz) ** 0.5
                r = radii[t, k]
                if dist < r:
                    viol += (r - dist) / r
        violations[p] = viol
    return lengths, violations


def polyline_length_numba(points: np.ndarray) -> float:
    if points.shape[0] < 2:
        return 0.0
    return float(_polyline_length_jit(np.ascontiguousarray(points, dtype=np.float64)))


def timed_violation_numba(
    points: np.ndarray,
    centers: np.ndarray,
    radii: np.ndarray,
    step_idx: np.ndarray,
) -> float:
    if centers.shape[1] == 0:
        return 0.0
    return float(
        _timed_violation_jit(
            np.ascontiguousarray(points, dtype=np.float64),
            np.ascontiguousarray(centers, dtype=np.float64),
            np.ascontiguousarray(radii, dtype=np.float64),
            np.ascontiguousarray(step_idx, dtype=np.int64),
        )
    )


def evaluate_swarm_numba(
    basis: np.ndarray,
    control_points: np.ndarray,
    centers: np.ndarray,
    radii: np.ndarray,
    step_idx: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    return _evaluate_swarm_jit(
        np.ascontiguousarray(basis, dtype=np.float64),
        np.ascontiguousarray(control_points, dtype=np.float64),
        np.ascontiguousarray(centers, dtype=np.float64),
        np.ascontiguousarray(radii, dtype=np.float64),
        np.ascontiguousarray(step_idx, dtype=np.int64),
    )


# ---------------------------------------------------------------------------
# backend selection


def resolve_backend(name: str | None = None) -> str:
    """Pick the active backend from an explicit name or the environment."""
    if name is None:
        name = os.environ.get(ENV_FLAG, "").strip().lower()
    if name == "numpy":
        return "numpy"
    if name == "numba":
        if not NUMBA_AVAILABLE:
            raise RuntimeError("AUVPLAN_BACKEND=numba but numba is not importable")
        return "numba"
    if name:
        raise ValueError(f"unknown backend {name!r}; use 'numba' or 'numpy'")
    return "numba" if NUMBA_AVAILABLE else "numpy"


BACKEND = resolve_backend()

if BACKEND == "numba":
    polyline_length = polyline_length_numba
    timed_violation = timed_violation_numba
    evaluate_swarm = evaluate_swarm_numba
else:
    polyline_length = polyline_length_numpy
    timed_violation = timed_violation_numpy
    evaluate_swarm = evaluate_swarm_numpy
