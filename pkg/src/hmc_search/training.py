"""Episode loop and trainers.

The main trainer runs option-level episodes against randomly spawned
clouds and backs the trajectory return (reward_scaling * clouds_found /
steps_taken, successful episodes only) into the table, Monte Carlo style
when the discount is zero.  The two demo trainers run classic per-step
tabular Q-learning with primitive actions so the failure mode that
motivates the modified agent can be reproduced and inspected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .env import (
    Cell,
    CloudField,
    GridConfig,
    RandomSource,
    make_rng,
    move,
    sense,
    spawn_clouds,
)
from .policy import (
    QTable,
    SelectionParams,
    choose_option,
    execute_option,
    mc_update,
    new_qtable,
    new_visit_memory,
    option_stride,
    q_update,
    record_visits,
    select_option,
)

# A zero-step clamped option consumes no budget; without the memory filter a
# deterministic policy could repeat it forever, so episodes additionally stop
# after this many option selections.
_DECISION_CAP_FACTOR = 8


@dataclass
class Hyperparams:
    """Agent and environment settings; defaults are the tuned reference set."""

    grid_length: int = 20
    pollution_diameter: int = 5
    max_steps: int = 400
    num_episodes: int = 1000
    learning_rate: float = 0.1
    discount_rate: float = 0.0
    epsilon_start: float = 1.0
    epsilon_final: float = 0.0
    epsilon_decay: float = 0.001
    best_learn_value: int = 1
    num_clouds: int = 1
    mof_value: float = 10.0
    stop_learn_value: float = 1.0
    # Repeats of the committed direction after its first move; one
    # decision walks option_length + 1 cells.
    option_length: int = 3
    reward_scaling: float = 30.0
    # Variant switches, not part of the JSON config surface.
    binary_memory: bool = False
    normalize_epsilon_decay: bool = True

    def __post_init__(self):
        if self.num_episodes < 1:
            raise ValueError("num_episodes must be at least 1")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError("learning_rate must be in (0, 1]")
        if not 0.0 <= self.discount_rate <= 1.0:
            raise ValueError("discount_rate must be in [0, 1]")
        for name in ("epsilon_start", "epsilon_final"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"{name} must be in [0, 1]")
        if self.epsilon_final > self.epsilon_start:
            raise ValueError("epsilon_final must not exceed epsilon_start")
        if self.epsilon_decay < 0.0:
            raise ValueError("epsilon_decay must be nonnegative")
        if self.best_learn_value < 1:
            raise ValueError("best_learn_value must be at least 1")
        if self.num_clouds < 1:
            raise ValueError("num_clouds must be at least 1")
        if self.mof_value < 0.0:
            raise ValueError("mof_value must be nonnegative")
        if not 0.0 < self.stop_learn_value <= 1.0:
            raise ValueError("stop_learn_value must be in (0, 1]")
        if self.option_length < 1:
            raise ValueError("option_length must be at least 1")
        if not self.reward_scaling > 0.0:
            raise ValueError("reward_scaling must be positive")
        # Grid constraints are validated by GridConfig.
        self.grid()

    def grid(self) -> GridConfig:
        return GridConfig(
            grid_length=self.grid_length,
            pollution_diameter=self.pollution_diameter,
            start_cell=(0, 0),
            max_steps=self.max_steps,
        )

    def selection(self, epsilon: float) -> SelectionParams:
        return SelectionParams(
            epsilon=epsilon,
            mof_value=self.mof_value,
            option_length=self.option_length,
            binary_memory=self.binary_memory,
        )

    def with_value(self, name: str, value) -> "Hyperparams":
        return replace(self, **{name: value})


@dataclass
class Trajectory:
    """One episode as seen by the learner."""

    transitions: list[tuple[Cell, int]]  # (state, option direction) per decision
    cells: list[Cell]  # start cell plus every cell entered, in order
    n_step: int
    n_poll: int
    r_t: float


@dataclass
class EpisodeRecord:
    episode: int
    epsilon: float
    n_step: int
    n_poll: int
    r_t: float


@dataclass
class TrainReport:
    records: list[EpisodeRecord]
    q: QTable
    seed: int
    hyperparams: Hyperparams


def trajectory_reward(s_r: float, n_step: int, n_poll: int) -> float:
    """Trajectory return: s_r * n_poll / n_step."""
    if not math.isfinite(s_r):
        raise ValueError("reward scaling must be finite")
    if n_step < 1:
        raise ValueError("n_step must be at least 1")
    if n_poll < 0:
        raise ValueError("n_poll must be nonnegative")
    return s_r * n_poll / n_step


def epsilon_at(episode: int, hp: Hyperparams) -> float:
    """Linear exploration schedule.

    With normalization on (the default) the decay per episode is
    (epsilon_start - epsilon_final) / num_episodes, so the schedule hits
    its midpoint halfway through training regardless of episode count.
    Otherwise the literal epsilon_decay constant is applied.
    """
    if episode < 0:
        raise ValueError("episode must be nonnegative")
    start, final = hp.epsilon_start, hp.epsilon_final
    if hp.normalize_epsilon_decay:
        if episode >= hp.num_episodes:
            return final
        return start + (final - start) * (episode / hp.num_episodes)
    return max(final, start - episode * hp.epsilon_decay)


def update_window(hp: Hyperparams) -> int:
    """Number of leading episodes with learning enabled."""
    return sum(
        1 for episode in range(hp.num_episodes)
        if episode < hp.stop_learn_value * hp.num_episodes
    )


def run_episode(q: QTable, hp: Hyperparams, mode: str, rng: RandomSource | None,
                *, field: CloudField | None = None,
                epsilon: float | None = None) -> Trajectory:
    """Run one option-level episode and return its trajectory.

    mode "train" is epsilon-soft with the given epsilon; mode "eval" is
    pure greedy.  The memory filter is active in both modes but starts
    from a fresh all-zero memory each episode and never touches q.  The
    episode ends when every cloud is collected or the primitive step
    budget is spent.  A caller-provided field is copied, not consumed.
    """
    if mode not in ("train", "eval"):
        raise ValueError(f"unknown mode {mode!r}")
    cfg = hp.grid()
    if field is None:
        count = 1 if mode == "eval" else hp.num_clouds
        field = spawn_clouds(cfg, count, rng)
    else:
        field = field.copy()
    if epsilon is None:
        epsilon = 0.0 if mode == "eval" else hp.epsilon_start
    params = hp.selection(epsilon if mode == "train" else 0.0)
    mem = new_visit_memory(cfg.grid_length)
    pos = cfg.start_cell
    transitions: list[tuple[Cell, int]] = []
    cells: list[Cell] = [pos]
    n_step = 0
    n_poll = 0
    decisions = 0
    decision_cap = _DECISION_CAP_FACTOR * cfg.max_steps + 32
    while field.clouds and n_step < cfg.max_steps and decisions < decision_cap:
        decisions += 1
        if mode == "train":
            direction = choose_option(q, mem, pos, params, rng)
        else:
            direction = select_option(q, mem, pos, params, "exploit", rng)
        outcome, field = execute_option(
            field, pos, direction, option_stride(hp.option_length),
            cfg.max_steps - n_step
        )
        transitions.append((pos, direction))
        record_visits(mem, outcome)
        cells.extend(outcome.path)
        n_step += outcome.primitive_steps
        n_poll += outcome.found_count
        pos = outcome.terminal
    if n_poll > 0:
        r_t = trajectory_reward(hp.reward_scaling, n_step, n_poll)
    else:
        r_t = 0.0
    return Trajectory(transitions, cells, n_step, n_poll, r_t)


def _apply_trajectory(q: QTable, traj: Trajectory, hp: Hyperparams) -> None:
    # Every-visit backup in trajectory order.  With a positive discount the
    # bootstrap target uses the state where the next decision was made.
    if hp.discount_rate == 0.0:
        for s, o in traj.transitions:
            mc_update(q, s, o, traj.r_t, hp.learning_rate)
        return
    states = [s for s, _ in traj.transitions]
    states.append(traj.cells[-1])
    for i, (s, o) in enumerate(traj.transitions):
        q_update(q, s, o, traj.r_t, states[i + 1], hp.learning_rate, hp.discount_rate)


def train_agent(hp: Hyperparams, seed: int) -> TrainReport:
    """Train a fresh table for hp.num_episodes episodes.

    Each episode spawns one cloud configuration, runs it
    hp.best_learn_value times (same clouds, fresh exploration noise), and
    learns only from the attempt with the highest trajectory return.
    Failed episodes (nothing found) never update the table, and no
    episode at or past stop_learn_value * num_episodes does either.
    """
    rng = make_rng(seed)
    cfg = hp.grid()
    q = new_qtable(cfg.grid_length)
    records: list[EpisodeRecord] = []
    learn_until = hp.stop_learn_value * hp.num_episodes
    for episode in range(hp.num_episodes):
        epsilon = epsilon_at(episode, hp)
        spawned = spawn_clouds(cfg, hp.num_clouds, rng)
        best: Trajectory | None = None
        for _ in range(hp.best_learn_value):
            traj = run_episode(q, hp, "train", rng, field=spawned, epsilon=epsilon)
            if best is None or traj.r_t > best.r_t:
                best = traj
        if episode < learn_until and best.n_poll > 0:
            _apply_trajectory(q, best, hp)
        records.append(EpisodeRecord(episode, epsilon, best.n_step, best.n_poll, best.r_t))
    return TrainReport(records, q, seed, hp)


def _greedy_action(q: QTable, pos: Cell) -> int:
    row = q[pos[0], pos[1]]
    best = 0
    for d in range(1, 4):
        if row[d] > row[best]:
            best = d
    return best


def _demo_epsilon(episode: int, n_episodes: int) -> float:
    # Linear 1 -> 0 over the demo, passing 0.5 at the halfway episode.
    return max(0.0, 1.0 - episode / n_episodes)


def _support_cells(field: CloudField) -> set[Cell]:
    cells: set[Cell] = set()
    for cloud in field.clouds:
        cells.update(cloud.support)
    return cells


def _demo_episode(q: QTable, hp: Hyperparams, cfg: GridConfig, field: CloudField,
                  support: set[Cell], epsilon: float, rng: RandomSource,
                  learn: bool) -> int | None:
    """One primitive-action episode for the plain Q-learning demos.

    The cloud field is a sensing landscape that stays in place for the
    whole episode: each step is rewarded with the intensity at the cell
    occupied after the action, plus a 100 find bonus the first time the
    agent stands on a cloud cell.  Learning episodes always run the full
    budget, and every attempted action consumes a step, wall bumps
    included, so greedy policies cannot stall the clock.  Evaluation
    episodes stop at the find.  Returns the step count of the first
    find, or None.
    """
    pos = cfg.start_cell
    found_at: int | None = None
    for step in range(cfg.max_steps):
        if learn and epsilon > 0.0 and rng.random() < epsilon:
            action = int(rng.integers(4))
        else:
            action = _greedy_action(q, pos)
        new_pos, _ = move(pos, action, cfg)
        reward = sense(field, new_pos)
        if found_at is None and new_pos in support:
            reward += 100.0
            found_at = step + 1
            if not learn:
                return found_at
        if learn:
            q_update(q, pos, action, reward, new_pos, hp.learning_rate, hp.discount_rate)
        pos = new_pos
    return found_at


def static_demo(hp: Hyperparams, seed: int, *, n_episodes: int = 2000,
                snapshot_episodes: tuple[int, ...] = (0, 500, 1000, 2000)):
    """Plain tabular Q-learning against one fixed cloud.

    Returns {episode: max-Q-per-cell grid} snapshots; key 0 is the
    untrained table.  The cloud is placed once at random and stays put
    across all episodes, with the find bonus rearmed each episode, so
    with a positive discount the values propagate back toward the start
    over training.
    """
    cfg = hp.grid()
    rng = make_rng(seed)
    q = new_qtable(cfg.grid_length)
    fixed = spawn_clouds(cfg, 1, rng)
    support = _support_cells(fixed)
    snapshots: dict[int, np.ndarray] = {}
    if 0 in snapshot_episodes:
        snapshots[0] = q.max(axis=2).copy()
    for episode in range(n_episodes):
        epsilon = _demo_epsilon(episode, n_episodes)
        _demo_episode(q, hp, cfg, fixed, support, epsilon, rng, learn=True)
        if episode + 1 in snapshot_episodes:
            snapshots[episode + 1] = q.max(axis=2).copy()
    return snapshots


def dynamic_demo(hp: Hyperparams, seed: int, *, n_episodes: int = 2000,
                 snapshot_episodes: tuple[int, ...] = (0, 1, 500, 1000, 2000),
                 n_eval_episodes: int = 1000):
    """Plain tabular Q-learning with the cloud respawned every episode.

    Trains like static_demo but on a moving target, then evaluates the
    final greedy policy (no memory filter) over fresh single-cloud
    episodes, stopping each at its first find.  Returns (snapshots,
    mean evaluation steps) with failed evaluation episodes counted as
    max_steps.
    """
    cfg = hp.grid()
    rng = make_rng(seed)
    q = new_qtable(cfg.grid_length)
    snapshots: dict[int, np.ndarray] = {}
    if 0 in snapshot_episodes:
        snapshots[0] = q.max(axis=2).copy()
    for episode in range(n_episodes):
        epsilon = _demo_epsilon(episode, n_episodes)
        spawned = spawn_clouds(cfg, 1, rng)
        _demo_episode(q, hp, cfg, spawned, _support_cells(spawned), epsilon, rng,
                      learn=True)
        if episode + 1 in snapshot_episodes:
            snapshots[episode + 1] = q.max(axis=2).copy()
    eval_rng = make_rng(seed, stream=1)
    total = 0
    for _ in range(n_eval_episodes):
        spawned = spawn_clouds(cfg, 1, eval_rng)
        steps = _demo_episode(q, hp, cfg, spawned, _support_cells(spawned), 0.0,
                              eval_rng, learn=False)
        total += steps if steps is not None else cfg.max_steps
    return snapshots, total / n_eval_episodes
