"""Benchmark the numba kernels against the pure-numpy fallback.

Runs each hot kernel on planner-shaped workloads, reports mean +/- std
wall time per call and the speedup, and cross-checks both backends for
agreement.  Run with:

    python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from auvplan.kernels import (
    NUMBA_AVAILABLE,
    evaluate_swarm_numba,
    evaluate_swarm_numpy,
    polyline_length_numba,
    polyline_length_numpy,
    timed_violation_numba,
    timed_violation_numpy,
)

WARMUP = 3
REPEATS = 50


def bench(fn, args, repeats=REPEATS):
    for _ in range(WARMUP):
        fn(*args)
    times = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        times.append((time.perf_counter() - start) * 1000.0)
    return float(np.mean(times)), float(np.std(times))


def field_arrays(rng, horizon, n_obs):
    centers = rng.uniform(-500.0, 500.0, (horizon, n_obs, 3))
    radii = rng.uniform(40.0, 160.0, (horizon, n_obs))
    return centers, radii


def compare(numpy_fn, numba_fn, args, diff):
    np_mean, np_std = bench(numpy_fn, args)
    nb_mean, nb_std = bench(numba_fn, args)
    print(f"  numpy: {np_mean:8.3f} ms +/- {np_std:.3f}")
    print(f"  numba: {nb_mean:8.3f} ms +/- {nb_std:.3f}")
    print(f"  speedup: {np_mean / nb_mean:.2f}x   max difference: {diff:.2e}")


def run_polyline(rng, n_samples):
    print(f"\npolyline_length, {n_samples} samples")
    points = rng.uniform(-1000.0, 1000.0, (n_samples, 3))
    diff = abs(polyline_length_numpy(points) - polyline_length_numba(points))
    compare(polyline_length_numpy, polyline_length_numba, (points,), diff)


def run_timed_violation(rng, n_samples, n_obs, horizon):
    print(f"\ntimed_violation, {n_samples} samples x {n_obs} obstacles, "
          f"horizon {horizon}")
    points = rng.uniform(-500.0, 500.0, (n_samples, 3))
    centers, radii = field_arrays(rng, horizon, n_obs)
    step_idx = np.minimum(
        np.ceil(np.arange(n_samples) * horizon / n_samples).astype(np.int64),
        horizon - 1,
    )
    args = (points, centers, radii, step_idx)
    diff = abs(timed_violation_numpy(*args) - timed_violation_numba(*args))
    compare(timed_violation_numpy, timed_violation_numba, args, diff)


def run_evaluate_swarm(rng, n_particles, n_ctrl, n_samples, n_obs, horizon):
    print(f"\nevaluate_swarm, {n_particles} particles x {n_ctrl} control points, "
          f"{n_samples} samples, {n_obs} obstacles")
    # Any row-stochastic matrix exercises the same arithmetic as a real basis.
    basis = rng.uniform(0.0, 1.0, (n_samples, n_ctrl))
    basis /= basis.sum(axis=1, keepdims=True)
    control = rng.uniform(-500.0, 500.0, (n_particles, n_ctrl, 3))
    centers, radii = field_arrays(rng, horizon, n_obs)
    step_idx = np.minimum(
        np.ceil(np.arange(n_samples) * horizon / n_samples).astype(np.int64),
        horizon - 1,
    )
    args = (basis, control, centers, radii, step_idx)
    len_np, vio_np = evaluate_swarm_numpy(*args)
    len_nb, vio_nb = evaluate_swarm_numba(*args)
    diff = max(np.abs(len_np - len_nb).max(), np.abs(vio_np - vio_nb).max())
    compare(evaluate_swarm_numpy, evaluate_swarm_numba, args, diff)


def main():
    if not NUMBA_AVAILABLE:
        print("numba is not importable; nothing to compare")
        return
    rng = np.random.default_rng(0)
    print(f"warmup {WARMUP}, repeats {REPEATS}")

    run_polyline(rng, 64)
    run_polyline(rng, 4096)

    run_timed_violation(rng, 64, 6, 100)
    run_timed_violation(rng, 640, 24, 100)

    # Default planner shape, then a denser swarm.
    run_evaluate_swarm(rng, 150, 8, 64, 6, 100)
    run_evaluate_swarm(rng, 300, 12, 128, 12, 100)


if __name__ == "__main__":
    main()
