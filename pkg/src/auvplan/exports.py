"""Line-oriented text artifacts for every harness run.

All numeric payload is formatted to six significant digits, so identical
run records always serialize to identical bytes.  Wall-clock timings are
deliberately kept out of the primary artifacts and written to a separate
timing file.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .mission import MissionLog
from .obstacles import ObstacleField
from .path_pso import PathRunStats
from .route_ga import GaRunStats


def fmt(value) -> str:
    """Fixed six-significant-digit float formatting; ints and bools verbatim."""
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6g}"
    return str(value)


def write_table(path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    """Write a whitespace-separated table with a header line."""
    path = Path(path)
    lines = [" ".join(header)]
    for row in rows:
        lines.append(" ".join(fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


@dataclass(frozen=True)
class MetricsRow:
    """One route planning run inside a campaign."""

    seed: int
    cpu_seconds: float
    best_cost: float
    t_available: float
    route_time: float
    total_distance: float
    total_weight: float
    n_tasks: int
    violation: float
    feasible: bool


METRICS_HEADER = (
    "seed",
    "best_cost",
    "t_available",
    "route_time",
    "total_distance",
    "total_weight",
    "n_tasks",
    "violation",
    "feasible",
)


def write_metrics(rows: Sequence[MetricsRow], path) -> Path:
    """Campaign metrics table; wall-clock CPU is excluded on purpose."""
    return write_table(
        path,
        METRICS_HEADER,
        (
            (
                r.seed,
                r.best_cost,
                r.t_available,
                r.route_time,
                r.total_distance,
                r.total_weight,
                r.n_tasks,
                r.violation,
                r.feasible,
            )
            for r in rows
        ),
    )


def write_metrics_summary(rows: Sequence[MetricsRow], path) -> Path:
    """Five-number summary per campaign metric."""
    metrics = {
        "best_cost": [r.best_cost for r in rows],
        "route_time": [r.route_time for r in rows],
        "total_distance": [r.total_distance for r in rows],
        "total_weight": [r.total_weight for r in rows],
        "n_tasks": [r.n_tasks for r in rows],
        "violation": [r.violation for r in rows],
    }
    header = ("metric", "min", "q1", "median", "q3", "max")
    out = []
    for name, values in metrics.items():
        qs = np.percentile(np.asarray(values, dtype=np.float64), [0, 25, 50, 75, 100])
        out.append((name, *[float(q) for q in qs]))
    return write_table(path, header, out)


def write_timings(entries: Sequence[tuple[str, float]], path) -> Path:
    """Wall-clock timings, one label per line; never part of golden output."""
    return write_table(path, ("label", "seconds"), entries)


def write_ga_trace(stats: GaRunStats, path, call_no: int | None = None) -> Path:
    rows = []
    for i, (b, m, v) in enumerate(
        zip(stats.best_costs, stats.mean_costs, stats.violations), start=1
    ):
        rows.append((i, b, m, v) if call_no is None else (call_no, i, b, m, v))
    header = ("iteration", "best_cost", "mean_cost", "violation")
    if call_no is not None:
        header = ("call",) + header
    return write_table(path, header, rows)


def write_pso_trace(stats: PathRunStats, path, call_no: int | None = None) -> Path:
    rows = []
    for i, (b, m, v) in enumerate(
        zip(stats.best_costs, stats.mean_costs, stats.mean_violations), start=1
    ):
        rows.append((i, b, m, v) if call_no is None else (call_no, i, b, m, v))
    header = ("iteration", "best_cost", "mean_cost", "mean_violation")
    if call_no is not None:
        header = ("call",) + header
    return write_table(path, header, rows)


def write_multi_ga_traces(traces: Sequence[GaRunStats], path) -> Path:
    rows = []
    for call_no, stats in enumerate(traces, start=1):
        for i, (b, m, v) in enumerate(
            zip(stats.best_costs, stats.mean_costs, stats.violations), start=1
        ):
            rows.append((call_no, i, b, m, v))
    return write_table(path, ("call", "iteration", "best_cost", "mean_cost", "violation"), rows)


def write_multi_pso_traces(traces: Sequence[PathRunStats], path) -> Path:
    rows = []
    for call_no, stats in enumerate(traces, start=1):
        for i, (b, m, v) in enumerate(
            zip(stats.best_costs, stats.mean_costs, stats.mean_violations), start=1
        ):
            rows.append((call_no, i, b, m, v))
    return write_table(
        path, ("call", "iteration", "best_cost", "mean_cost", "mean_violation"), rows
    )


def write_trajectory(samples: np.ndarray, path) -> Path:
    pts = np.asarray(samples, dtype=np.float64)
    return write_table(
        path,
        ("index", "x", "y", "z"),
        ((i, p[0], p[1], p[2]) for i, p in enumerate(pts)),
    )


def write_mission_trajectories(log: MissionLog, path) -> Path:
    rows = []
    for leg_no, samples in enumerate(log.path_samples, start=1):
        for i, p in enumerate(np.asarray(samples, dtype=np.float64)):
            rows.append((leg_no, i, p[0], p[1], p[2]))
    return write_table(path, ("leg", "index", "x", "y", "z"), rows)


def write_field_snapshot(field: ObstacleField, path) -> Path:
    rows = [
        (o.kind.value, o.position[0], o.position[1], o.position[2], o.radius, o.halo)
        for o in field.obstacles
    ]
    return write_table(path, ("kind", "x", "y", "z", "radius", "halo"), rows)


def write_mission_routes(log: MissionLog, path) -> Path:
    header = (
        "call",
        "start",
        "dest",
        "n_tasks",
        "weight",
        "cost",
        "cpu",
        "t_available",
        "t_route",
        "valid",
        "sequence",
    )
    rows = [
        (
            r.call_no,
            r.start,
            r.dest,
            r.n_tasks,
            r.weight,
            r.cost,
            r.cpu,
            r.t_available,
            r.t_route,
            r.valid,
            "-".join(str(n) for n in r.sequence),
        )
        for r in log.grp_records
    ]
    return write_table(path, header, rows)


def write_mission_legs(log: MissionLog, path) -> Path:
    header = (
        "route",
        "call",
        "from",
        "to",
        "violation",
        "cost",
        "cpu",
        "t_path_flight",
        "t_expected",
        "t_available",
        "replan_flag",
        "lpp_flag",
    )
    rows = [
        (
            leg.route_id,
            leg.call_index,
            leg.edge[0],
            leg.edge[1],
            leg.violation,
            leg.cost,
            leg.cpu,
            leg.t_path_flight,
            leg.t_expected,
            leg.t_available_after,
            leg.replan_flag,
            leg.lpp_flag,
        )
        for leg in log.leg_records
    ]
    return write_table(path, header, rows)


def write_mission_summary(log: MissionLog, path) -> Path:
    path = Path(path)
    lines = [
        f"success {fmt(log.success)}",
        f"reason {log.reason}",
        f"t_budget {fmt(log.t_budget)}",
        f"remaining_time {fmt(log.remaining_time)}",
        f"grp_calls {len(log.grp_records)}",
        f"legs_flown {len(log.leg_records)}",
        f"replans {log.replan_count}",
        "final_sequence " + "-".join(str(n) for n in log.final_sequence),
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    return path


def export_artifacts(log: MissionLog, out_dir) -> list[Path]:
    """Write the full mission artifact set; returns the created paths.

    Pure formatting of the in-memory log: exporting the same log twice
    yields byte-identical files.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [
        write_mission_routes(log, out / "mission_routes.txt"),
        write_mission_legs(log, out / "mission_legs.txt"),
        write_mission_summary(log, out / "mission_summary.txt"),
        write_multi_ga_traces(log.ga_traces, out / "route_traces.txt"),
        write_multi_pso_traces(log.path_traces, out / "path_traces.txt"),
        write_mission_trajectories(log, out / "trajectories.txt"),
    ]
    return written
