"""Two-layer AUV mission planning: GA route selection plus PSO path planning."""

from .graph import (
    Edge,
    FeasibilityReport,
    InvalidParameterError,
    InvalidRouteError,
    MissionGraph,
    Route,
    Task,
    TaskRanges,
    Waypoint,
    edge_distance,
    edge_traverse_time,
    generate_random_network,
    load_graph,
    route_distance,
    route_time,
    route_weight,
    save_graph,
    validate_route,
)
from .obstacles import (
    Obstacle,
    ObstacleField,
    ObstacleKind,
    ObstacleParams,
    OperationWindow,
    SpawnError,
    collision_violation,
    make_operation_window,
    predict_states,
    scenario_counts,
    spawn_obstacles,
    step_obstacles,
)
from .path_pso import (
    BSplineConfig,
    BSplinePath,
    PathRunStats,
    PsoConfig,
    bspline_basis,
    bspline_curve,
    control_point_bounds,
    path_cost,
    path_flight_time,
    path_length,
    plan_path,
)
from .route_ga import (
    GaConfig,
    GaRunStats,
    InfeasibleRouteError,
    build_feasible_route,
    mutate,
    plan_route,
    roulette_select,
    route_cost,
    uniform_crossover,
)
from .mission import (
    Decision,
    GrpRecord,
    LegRecord,
    MissionLog,
    MissionState,
    apply_leg,
    expected_time,
    make_field_generator,
    replan_check,
    run_mission,
)
from .config import ExperimentConfig, load_config, parse_config, save_config, serialize_config

__version__ = "0.1.0"
