"""Gridworld pollution search: option-based Monte Carlo agent vs. fixed patterns.

The package splits into small layers: `env` holds the grid and cloud
mechanics, `policy` the value table and option selection, `training`
the episode loop, `baselines` the deterministic snake and spiral
sweeps, `evalharness` scoring and duels, and `sweep` parameter tuning.
"""
from .baselines import (
    PatternPath,
    ring_insets,
    ring_spacing,
    snake_path,
    spiral_path,
    steps_to_find,
    sweep_rows,
)
from .env import (
    DIRECTION_NAMES,
    DOWN,
    LEFT,
    RIGHT,
    UP,
    Cloud,
    CloudField,
    GridConfig,
    collect,
    disc_offsets,
    make_cloud,
    make_rng,
    move,
    sense,
    spawn_clouds,
)
from .evalharness import (
    DuelOutcome,
    EvalStats,
    PopulationReport,
    ScoreMap,
    duel,
    evaluate_agent,
    population_stats,
    route_heatmap,
    run_duels,
    score_map,
)
from .policy import (
    OptionOutcome,
    SelectionParams,
    choose_option,
    execute_option,
    mc_update,
    new_qtable,
    new_visit_memory,
    option_stride,
    option_terminal,
    q_update,
    read_qtable_csv,
    record_visits,
    select_option,
    write_qtable_csv,
)
from .sweep import (
    SweepResult,
    SweepSpec,
    SweepValueResult,
    confidence_interval,
    load_plan,
    run_sweep,
    tuning_loop,
)
from .training import (
    EpisodeRecord,
    Hyperparams,
    TrainReport,
    Trajectory,
    dynamic_demo,
    epsilon_at,
    run_episode,
    static_demo,
    train_agent,
    trajectory_reward,
)

__version__ = "0.1.0"

__all__ = [
    "Cloud", "CloudField", "DIRECTION_NAMES", "DOWN", "DuelOutcome",
    "EpisodeRecord", "EvalStats", "GridConfig", "Hyperparams", "LEFT",
    "OptionOutcome", "PatternPath", "PopulationReport", "RIGHT", "ScoreMap",
    "SelectionParams", "SweepResult", "SweepSpec", "SweepValueResult",
    "TrainReport", "Trajectory", "UP", "choose_option", "collect",
    "confidence_interval", "disc_offsets", "duel", "dynamic_demo",
    "epsilon_at", "evaluate_agent", "execute_option", "load_plan",
    "make_cloud", "make_rng", "mc_update", "move", "new_qtable",
    "new_visit_memory", "option_stride", "option_terminal",
    "population_stats", "q_update",
    "read_qtable_csv", "record_visits", "ring_insets", "ring_spacing",
    "route_heatmap", "run_duels", "run_episode", "run_sweep", "score_map",
    "select_option", "sense", "snake_path", "spawn_clouds", "spiral_path",
    "static_demo", "steps_to_find", "sweep_rows", "train_agent",
    "trajectory_reward", "tuning_loop", "write_qtable_csv",
]
