"""Command line harness: network generation, planning, missions, campaigns.

Every subcommand accepts --seed, --config (JSON) and --out; primary outputs
are deterministic per seed, wall-clock timings go to a separate file.  Exit
codes: 0 success, 1 run failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from pathlib import Path

import numpy as np

from . import kernels
from .config import (
    ExperimentConfig,
    load_config,
    save_config,
    serialize_config,
)
from .exports import (
    MetricsRow,
    export_artifacts,
    write_field_snapshot,
    write_ga_trace,
    write_metrics,
    write_metrics_summary,
    write_pso_trace,
    write_table,
    write_timings,
    write_trajectory,
    fmt,
)
from .graph import (
    InvalidParameterError,
    MissionGraph,
    generate_random_network,
    load_graph,
    save_graph,
)
from .mission import make_field_generator, run_mission
from .obstacles import SpawnError, make_operation_window, scenario_counts, spawn_obstacles
from .path_pso import plan_path
from .route_ga import InfeasibleRouteError, plan_route
from .seeding import DOMAIN_FIELD, DOMAIN_NETWORK, derive_seed


def _build_graph(cfg: ExperimentConfig, graph_file: str | None) -> MissionGraph:
    if graph_file:
        return load_graph(graph_file)
    gp = cfg.graph
    return generate_random_network(
        gp.n_waypoints,
        gp.n_edges,
        derive_seed(cfg.seed, DOMAIN_NETWORK),
        task_ranges=gp.tasks,
        xy_range=gp.xy_range,
        z_range=gp.z_range,
        start_id=gp.start_id,
        dest_id=gp.dest_id,
    )


def _prepare_out(cfg: ExperimentConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_config(cfg, out / "config_used.json")
    return out


def cmd_gen_network(cfg: ExperimentConfig, graph_file: str | None) -> int:
    out = _prepare_out(cfg)
    g = _build_graph(cfg, graph_file)
    save_graph(g, out / "network.graph")
    print(f"wrote {out / 'network.graph'} ({g.n_waypoints} waypoints, {g.n_edges} edges)")
    return 0


def cmd_plan_route(cfg: ExperimentConfig, graph_file: str | None) -> int:
    out = _prepare_out(cfg)
    g = _build_graph(cfg, graph_file)
    t0 = time.perf_counter()
    route, stats = plan_route(
        g, cfg.mission.t_available, cfg.mission.v_auv, cfg.ga, cfg.seed
    )
    elapsed = time.perf_counter() - t0
    write_table(
        out / "route.txt",
        (
            "best_cost",
            "t_available",
            "route_time",
            "total_distance",
            "total_weight",
            "n_tasks",
            "violation",
            "sequence",
        ),
        [
            (
                stats.best_cost,
                cfg.mission.t_available,
                stats.route_time,
                stats.total_distance,
                stats.total_weight,
                stats.n_tasks,
                max(0.0, stats.route_time - cfg.mission.t_available),
                "-".join(str(n) for n in route.sequence),
            )
        ],
    )
    write_ga_trace(stats, out / "route_trace.txt")
    write_timings([("plan_route", elapsed)], out / "timings.txt")
    print(f"route {'-'.join(str(n) for n in route.sequence)} cost {fmt(stats.best_cost)}")
    return 0


def cmd_plan_path(cfg: ExperimentConfig, graph_file: str | None) -> int:
    out = _prepare_out(cfg)
    sp = cfg.suite
    window = make_operation_window(
        sp.start, sp.target, cfg.mission.window_inflation, cfg.mission.window_min_pad
    )
    rng = np.random.default_rng(derive_seed(cfg.seed, DOMAIN_FIELD))
    lo, hi = cfg.mission.count_range
    counts = scenario_counts(sp.scenario, int(rng.integers(lo, hi + 1)), rng)
    field = spawn_obstacles(window, counts, derive_seed(cfg.seed, DOMAIN_FIELD, 1), cfg.obstacles)
    t0 = time.perf_counter()
    path, stats = plan_path(
        sp.start, sp.target, field, cfg.bspline, cfg.pso, cfg.seed, cfg.mission.v_auv
    )
    elapsed = time.perf_counter() - t0
    write_trajectory(path.samples, out / "path.txt")
    write_pso_trace(stats, out / "path_trace.txt")
    write_field_snapshot(field, out / "field.txt")
    write_table(
        out / "path_summary.txt",
        ("length", "flight_time", "violation", "cost"),
        [(path.length, path.flight_time, path.violation, path.cost)],
    )
    write_timings([("plan_path", elapsed)], out / "timings.txt")
    print(
        f"path length {fmt(path.length)} m, flight {fmt(path.flight_time)} s, "
        f"violation {fmt(path.violation)}"
    )
    return 0


def cmd_run_mission(cfg: ExperimentConfig, graph_file: str | None) -> int:
    out = _prepare_out(cfg)
    g = _build_graph(cfg, graph_file)
    mp = cfg.mission
    field_gen = make_field_generator(mp.scenario, mp.count_range, cfg.obstacles)
    t0 = time.perf_counter()
    log = run_mission(
        g,
        field_gen,
        ga_cfg=cfg.ga,
        pso_cfg=cfg.pso,
        v_auv=mp.v_auv,
        t_available=mp.t_available,
        seed=cfg.seed,
        bspline_cfg=cfg.bspline,
        compute_charge=mp.compute_charge,
        window_inflation=mp.window_inflation,
        window_min_pad=mp.window_min_pad,
        budget_reserve=mp.budget_reserve,
    )
    elapsed = time.perf_counter() - t0
    export_artifacts(log, out)
    timings = [("run_mission", elapsed)]
    timings += [(f"grp_call_{i}", s.cpu_seconds) for i, s in enumerate(log.ga_traces, 1)]
    timings += [(f"lpp_call_{i}", s.cpu_seconds) for i, s in enumerate(log.path_traces, 1)]
    write_timings(timings, out / "timings.txt")
    status = "success" if log.success else f"FAILED: {log.reason}"
    print(
        f"mission {status}; legs {len(log.leg_records)}, replans {log.replan_count}, "
        f"remaining {fmt(log.remaining_time)} s"
    )
    return 0 if log.success else 1


def cmd_monte_carlo(cfg: ExperimentConfig, graph_file: str | None) -> int:
    out = _prepare_out(cfg)
    mc = cfg.monte_carlo
    rows: list[MetricsRow] = []
    timings: list[tuple[str, float]] = []
    t0 = time.perf_counter()
    for run in range(mc.runs):
        run_seed = derive_seed(cfg.seed, DOMAIN_NETWORK, run)
        try:
            g = generate_random_network(
                mc.n_waypoints, mc.n_edges, run_seed, task_ranges=cfg.graph.tasks
            )
            route, stats = plan_route(
                g, mc.t_available, cfg.mission.v_auv, cfg.ga, derive_seed(cfg.seed, run)
            )
        except Exception as exc:
            raise RuntimeError(f"monte carlo run {run} (seed {run_seed}) failed: {exc}") from exc
        rows.append(
            MetricsRow(
                seed=run,
                cpu_seconds=stats.cpu_seconds,
                best_cost=stats.best_cost,
                t_available=mc.t_available,
                route_time=stats.route_time,
                total_distance=stats.total_distance,
                total_weight=stats.total_weight,
                n_tasks=stats.n_tasks,
                violation=max(0.0, stats.route_time - mc.t_available),
                feasible=stats.route_time < mc.t_available,
            )
        )
        timings.append((f"run_{run}", stats.cpu_seconds))
    write_metrics(rows, out / "metrics.txt")
    write_metrics_summary(rows, out / "metrics_summary.txt")
    timings.append(("total", time.perf_counter() - t0))
    write_timings(timings, out / "timings.txt")
    feasible = sum(1 for r in rows if r.feasible)
    print(f"{len(rows)} runs, {feasible} within budget")
    return 0


def cmd_scenario_suite(cfg: ExperimentConfig, graph_file: str | None) -> int:
    out = _prepare_out(cfg)
    sp = cfg.suite
    window = make_operation_window(
        sp.start, sp.target, cfg.mission.window_inflation, cfg.mission.window_min_pad
    )
    result_rows = []
    trace_rows = []
    timings = []
    for count in sp.counts:
        for rep in range(sp.repetitions):
            case_seed = derive_seed(cfg.seed, sp.scenario, count, rep)
            rng = np.random.default_rng(derive_seed(case_seed, 0))
            counts = scenario_counts(sp.scenario, count, rng)
            field = spawn_obstacles(window, counts, derive_seed(case_seed, 1), cfg.obstacles)
            path, stats = plan_path(
                sp.start, sp.target, field, cfg.bspline, cfg.pso, case_seed, cfg.mission.v_auv
            )
            result_rows.append(
                (sp.scenario, count, rep, path.length, path.flight_time, path.violation, path.cost)
            )
            for i, (b, m, v) in enumerate(
                zip(stats.best_costs, stats.mean_costs, stats.mean_violations), start=1
            ):
                trace_rows.append((sp.scenario, count, rep, i, b, m, v))
            timings.append((f"s{sp.scenario}_n{count}_r{rep}", stats.cpu_seconds))
    write_table(
        out / "suite_results.txt",
        ("scenario", "obstacles", "rep", "length", "flight_time", "violation", "cost"),
        result_rows,
    )
    write_table(
        out / "suite_traces.txt",
        ("scenario", "obstacles", "rep", "iteration", "best_cost", "mean_cost", "mean_violation"),
        trace_rows,
    )
    write_timings(timings, out / "timings.txt")
    clean = sum(1 for r in result_rows if r[5] == 0.0)
    print(f"{len(result_rows)} planned legs, {clean} collision-free")
    return 0


COMMANDS = {
    "gen-network": cmd_gen_network,
    "plan-route": cmd_plan_route,
    "plan-path": cmd_plan_path,
    "run-mission": cmd_run_mission,
    "monte-carlo": cmd_monte_carlo,
    "scenario-suite": cmd_scenario_suite,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=None, help="run seed")
    p.add_argument("--config", default=None, help="JSON experiment config")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--graph", default=None, help="network file (overrides generation)")


def _parse_triplet(text: str) -> tuple[float, float, float]:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected x,y,z, got {text!r}")
    return (parts[0], parts[1], parts[2])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="auvplan",
        description="Two-layer AUV mission planning: GA routes plus PSO paths "
        f"(kernel backend: {kernels.BACKEND})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-network", help="generate a random mission network")
    _add_common(p)
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--edges", type=int, default=None)

    p = sub.add_parser("plan-route", help="plan one global route")
    _add_common(p)
    p.add_argument("--budget", type=float, default=None, help="available time, seconds")

    p = sub.add_parser("plan-path", help="plan one local path through obstacles")
    _add_common(p)
    p.add_argument("--start", type=_parse_triplet, default=None)
    p.add_argument("--target", type=_parse_triplet, default=None)
    p.add_argument("--scenario", type=int, default=None, choices=(1, 2, 3, 4))

    p = sub.add_parser("run-mission", help="fly a full mission with replanning")
    _add_common(p)
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--edges", type=int, default=None)
    p.add_argument("--budget", type=float, default=None)
    p.add_argument("--scenario", type=int, default=None, choices=(1, 2, 3, 4))

    p = sub.add_parser("monte-carlo", help="route planner campaign over random networks")
    _add_common(p)
    p.add_argument("--runs", type=int, default=None)
    p.add_argument("--nodes", type=int, default=None)
    p.add_argument("--edges", type=int, default=None)
    p.add_argument("--budget", type=float, default=None)

    p = sub.add_parser("scenario-suite", help="path planner benchmark over scenarios")
    _add_common(p)
    p.add_argument("--scenario", type=int, default=None, choices=(1, 2, 3, 4))
    p.add_argument("--reps", type=int, default=None)

    return parser


def _apply_overrides(cfg: ExperimentConfig, args: argparse.Namespace) -> ExperimentConfig:
    def patch(obj, **updates):
        updates = {k: v for k, v in updates.items() if v is not None}
        return dataclasses.replace(obj, **updates) if updates else obj

    cfg = patch(
        cfg,
        mode=args.command,
        seed=getattr(args, "seed", None),
        out_dir=getattr(args, "out", None),
    )
    cfg = patch(
        cfg,
        graph=patch(
            cfg.graph,
            n_waypoints=getattr(args, "nodes", None),
            n_edges=getattr(args, "edges", None),
        ),
    )
    mission_updates = {"t_available": getattr(args, "budget", None)}
    if args.command == "run-mission":
        mission_updates["scenario"] = getattr(args, "scenario", None)
    cfg = patch(cfg, mission=patch(cfg.mission, **mission_updates))
    if args.command in ("plan-path", "scenario-suite"):
        cfg = patch(
            cfg,
            suite=patch(
                cfg.suite,
                scenario=getattr(args, "scenario", None),
                repetitions=getattr(args, "reps", None),
                start=getattr(args, "start", None),
                target=getattr(args, "target", None),
            ),
        )
    if args.command == "monte-carlo":
        cfg = patch(
            cfg,
            monte_carlo=patch(
                cfg.monte_carlo,
                runs=getattr(args, "runs", None),
                n_waypoints=getattr(args, "nodes", None),
                n_edges=getattr(args, "edges", None),
                t_available=getattr(args, "budget", None),
            ),
        )
    return cfg


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else ExperimentConfig()
        cfg = _apply_overrides(cfg, args)
        return COMMANDS[args.command](cfg, args.graph)
    except (InvalidParameterError, SpawnError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except InfeasibleRouteError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
