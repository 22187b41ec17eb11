"""Evaluation: step statistics, duels against patterns, score maps.

All comparisons score the agent and the pattern against the identical
cloud; fewer steps wins.  Failed agent episodes count the full step
budget, which makes them automatic losses against any finishing pattern.
"""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import PatternPath, snake_path, spiral_path, steps_to_find
from .env import CloudField, make_cloud, make_rng, spawn_clouds
from .policy import QTable
from .training import Hyperparams, run_episode, train_agent

WIN, TIE, LOSS = "win", "tie", "loss"


@dataclass
class EvalStats:
    """Step counts over an evaluation batch, failures scored as max_steps."""

    steps: list[int]
    failures: int
    mean: float
    median: float

    @classmethod
    def from_steps(cls, steps: list[int], failures: int) -> "EvalStats":
        ordered = sorted(steps)
        n = len(ordered)
        mean = sum(ordered) / n
        median = float(ordered[(n - 1) // 2])  # lower median for even n
        return cls(list(steps), failures, mean, median)


@dataclass
class DuelOutcome:
    wins: int = 0
    ties: int = 0
    losses: int = 0

    @property
    def total(self) -> int:
        return self.wins + self.ties + self.losses

    def add(self, verdict: str) -> None:
        if verdict == WIN:
            self.wins += 1
        elif verdict == TIE:
            self.ties += 1
        else:
            self.losses += 1


def duel(agent_steps: int, opponent_steps: int) -> str:
    """Strictly fewer steps wins; equal steps tie."""
    if agent_steps < opponent_steps:
        return WIN
    if agent_steps == opponent_steps:
        return TIE
    return LOSS


def _episode_steps(q: QTable, hp: Hyperparams, field: CloudField | None, rng) -> int:
    traj = run_episode(q, hp, "eval", rng, field=field)
    return traj.n_step if traj.n_poll > 0 else hp.max_steps


def evaluate_agent(q: QTable, hp: Hyperparams, n_episodes: int, rng) -> EvalStats:
    """Greedy single-cloud episodes with the memory filter active."""
    if n_episodes < 1:
        raise ValueError("n_episodes must be at least 1")
    steps = []
    failures = 0
    for _ in range(n_episodes):
        traj = run_episode(q, hp, "eval", rng)
        if traj.n_poll > 0:
            steps.append(traj.n_step)
        else:
            steps.append(hp.max_steps)
            failures += 1
    return EvalStats.from_steps(steps, failures)


def run_duels(q: QTable, hp: Hyperparams, n: int, rng) -> dict[str, DuelOutcome]:
    """n independent random clouds, each scored for the agent and both patterns."""
    if n < 1:
        raise ValueError("n must be at least 1")
    cfg = hp.grid()
    patterns = {
        "snake": snake_path(cfg.grid_length, cfg.pollution_diameter),
        "spiral": spiral_path(cfg.grid_length, cfg.pollution_diameter),
    }
    outcomes = {name: DuelOutcome() for name in patterns}
    for _ in range(n):
        field = spawn_clouds(cfg, 1, rng)
        agent_steps = _episode_steps(q, hp, field, None)
        for name, pattern in patterns.items():
            opponent_steps = steps_to_find(pattern, field.clouds[0], cfg.max_steps)
            outcomes[name].add(duel(agent_steps, opponent_steps))
    return outcomes


@dataclass
class ScoreMap:
    """Duel outcome for every possible cloud center."""

    opponent: str
    outcome: np.ndarray  # int8 grid, +1 win / 0 tie / -1 loss
    agent_steps: np.ndarray
    opponent_steps: np.ndarray

    @property
    def wins(self) -> int:
        return int((self.outcome > 0).sum())

    @property
    def ties(self) -> int:
        return int((self.outcome == 0).sum())

    @property
    def losses(self) -> int:
        return int((self.outcome < 0).sum())


def score_map(q: QTable, hp: Hyperparams, opponent: PatternPath) -> ScoreMap:
    """Exhaustive duel over all grid_length ** 2 cloud centers.

    Both sides are deterministic, so the map needs no random source.
    """
    cfg = hp.grid()
    length = cfg.grid_length
    outcome = np.zeros((length, length), dtype=np.int8)
    agent_grid = np.zeros((length, length), dtype=np.int64)
    opponent_grid = np.zeros((length, length), dtype=np.int64)
    code = {WIN: 1, TIE: 0, LOSS: -1}
    for x in range(length):
        for y in range(length):
            cloud = make_cloud((x, y), cfg.pollution_diameter, length)
            field = CloudField([cloud], length)
            agent_steps = _episode_steps(q, hp, field, None)
            opponent_steps = steps_to_find(opponent, cloud, cfg.max_steps)
            outcome[x, y] = code[duel(agent_steps, opponent_steps)]
            agent_grid[x, y] = agent_steps
            opponent_grid[x, y] = opponent_steps
    return ScoreMap(opponent.kind, outcome, agent_grid, opponent_grid)


def route_heatmap(q: QTable, hp: Hyperparams, n_episodes: int, rng) -> np.ndarray:
    """Visit counts per cell over greedy evaluation episodes.

    Each episode contributes its start cell plus every cell entered, so
    the grand total is the sum of (steps + 1) over episodes.
    """
    counts = np.zeros((hp.grid_length, hp.grid_length), dtype=np.int64)
    for _ in range(n_episodes):
        traj = run_episode(q, hp, "eval", rng)
        for cell in traj.cells:
            counts[cell] += 1
    return counts


@dataclass
class AgentScore:
    seed: int
    mean_steps: float
    median_steps: float
    failures: int
    wins: int
    ties: int
    losses: int
    win_pct: float


@dataclass
class PopulationReport:
    agents: list[AgentScore]
    steps_hist: tuple[np.ndarray, np.ndarray]  # (bin edges, counts)
    win_hist: tuple[np.ndarray, np.ndarray]


def _population_worker(args) -> AgentScore:
    hp, seed, n_eval, n_duel = args
    report = train_agent(hp, seed)
    stats = evaluate_agent(report.q, hp, n_eval, make_rng(seed, stream=1))
    duels = run_duels(report.q, hp, n_duel, make_rng(seed, stream=2))["snake"]
    return AgentScore(
        seed=seed,
        mean_steps=stats.mean,
        median_steps=stats.median,
        failures=stats.failures,
        wins=duels.wins,
        ties=duels.ties,
        losses=duels.losses,
        win_pct=100.0 * duels.wins / duels.total,
    )


def population_stats(hp: Hyperparams, n_agents: int, base_seed: int,
                     *, n_eval: int = 1000, n_duel: int = 1000,
                     jobs: int = 1) -> PopulationReport:
    """Train many independently seeded agents and report score distributions.

    Seeds run base_seed .. base_seed + n_agents - 1.  Aggregation order is
    fixed by seed, so results do not depend on worker scheduling.
    """
    if n_agents < 1:
        raise ValueError("n_agents must be at least 1")
    work = [(hp, base_seed + i, n_eval, n_duel) for i in range(n_agents)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            agents = list(pool.map(_population_worker, work))
    else:
        agents = [_population_worker(item) for item in work]
    means = np.array([a.mean_steps for a in agents])
    win_pcts = np.array([a.win_pct for a in agents])
    steps_counts, steps_edges = np.histogram(means, bins=40, range=(0, hp.max_steps))
    win_counts, win_edges = np.histogram(win_pcts, bins=20, range=(0, 100))
    return PopulationReport(
        agents=agents,
        steps_hist=(steps_edges, steps_counts),
        win_hist=(win_edges, win_counts),
    )
