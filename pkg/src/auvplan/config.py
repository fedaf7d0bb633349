"""Experiment configuration with a lossless JSON round trip."""

from __future__ import annotations

import dataclasses
import json
import types
from dataclasses import dataclass, field
from typing import Union, get_args, get_origin, get_type_hints

from .graph import InvalidParameterError, TaskRanges
from .obstacles import ObstacleParams
from .path_pso import BSplineConfig, PsoConfig
from .route_ga import GaConfig


@dataclass(frozen=True)
class GraphParams:
    """Random network generation parameters."""

    n_waypoints: int = 20
    n_edges: int = 100
    xy_range: tuple[float, float] = (0.0, 10000.0)
    z_range: tuple[float, float] = (0.0, 100.0)
    tasks: TaskRanges = TaskRanges()
    start_id: int | None = None
    dest_id: int | None = None


@dataclass(frozen=True)
class MissionParams:
    """Mission execution parameters."""

    t_available: float = 10800.0
    v_auv: float = 3.0
    compute_charge: float = 0.0
    scenario: int = 4
    count_range: tuple[int, int] = (3, 6)
    window_inflation: float = 0.25
    window_min_pad: float = 150.0
    budget_reserve: float = 0.03


@dataclass(frozen=True)
class SuiteParams:
    """Scenario suite: standalone leg planning benchmarks."""

    scenario: int = 1
    counts: tuple[int, ...] = (3, 4, 5, 6)
    repetitions: int = 20
    start: tuple[float, float, float] = (0.0, 0.0, 50.0)
    target: tuple[float, float, float] = (3000.0, 2000.0, 60.0)


@dataclass(frozen=True)
class MonteCarloParams:
    """Route planner campaign over regenerated topologies."""

    runs: int = 100
    n_waypoints: int = 20
    n_edges: int = 100
    t_available: float = 25200.0


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a harness run needs; nested component configs included."""

    mode: str = ""
    seed: int = 0
    out_dir: str = "out"
    graph: GraphParams = GraphParams()
    ga: GaConfig = GaConfig()
    pso: PsoConfig = PsoConfig()
    bspline: BSplineConfig = BSplineConfig()
    obstacles: ObstacleParams = ObstacleParams()
    mission: MissionParams = MissionParams()
    suite: SuiteParams = SuiteParams()
    monte_carlo: MonteCarloParams = MonteCarloParams()


def _coerce(value, typ):
    origin = get_origin(typ)
    if dataclasses.is_dataclass(typ):
        return _from_dict(typ, value)
    if origin is tuple:
        args = get_args(typ)
        if len(args) == 2 and args[1] is Ellipsis:
            return tuple(_coerce(v, args[0]) for v in value)
        return tuple(_coerce(v, t) for v, t in zip(value, args))
    if origin in (Union, types.UnionType):
        if value is None:
            return None
        for t in get_args(typ):
            if t is type(None):
                continue
            return _coerce(value, t)
    if typ is float:
        return float(value)
    if typ is int:
        return int(value)
    if typ is bool:
        return bool(value)
    if typ is str:
        return str(value)
    return value


def _from_dict(cls, data):
    if not isinstance(data, dict):
        raise InvalidParameterError(f"expected a mapping for {cls.__name__}, got {type(data)}")
    hints = get_type_hints(cls)
    known = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - known
    if unknown:
        raise InvalidParameterError(
            f"unknown {cls.__name__} fields: {', '.join(sorted(unknown))}"
        )
    kwargs = {name: _coerce(data[name], hints[name]) for name in data}
    return cls(**kwargs)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    return dataclasses.asdict(cfg)


def config_from_dict(data: dict) -> ExperimentConfig:
    return _from_dict(ExperimentConfig, data)


def serialize_config(cfg: ExperimentConfig) -> str:
    return json.dumps(config_to_dict(cfg), indent=2, sort_keys=True) + "\n"


def parse_config(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidParameterError(f"config is not valid JSON: {exc}") from exc
    return config_from_dict(data)


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def save_config(cfg: ExperimentConfig, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_config(cfg))
