"""Hyperparameter sweeps with confidence intervals.

A sweep trains a batch of independently seeded agents per candidate
value, scores each by mean evaluation steps, and picks the value with
the lowest mean.  A tuning loop chains sweeps, fixing each winner into
the base settings before the next stage, optionally running the whole
plan a second time for confirmation.
"""
from __future__ import annotations

import dataclasses
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .env import make_rng
from .evalharness import evaluate_agent, run_duels
from .training import Hyperparams, train_agent

_SWEEPABLE = frozenset(
    f.name for f in dataclasses.fields(Hyperparams)
    if f.name not in ("binary_memory", "normalize_epsilon_decay")
)


def confidence_interval(samples) -> tuple[float, float]:
    """(mean, 95% half width) via the normal approximation 1.96 * s / sqrt(n).

    Uses the n-1 sample standard deviation; a single sample gets half
    width zero.
    """
    values = list(samples)
    n = len(values)
    if n == 0:
        raise ValueError("samples must be nonempty")
    mean = sum(values) / n
    if n == 1:
        return mean, 0.0
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, 1.96 * math.sqrt(var) / math.sqrt(n)


@dataclass
class SweepSpec:
    parameter: str
    values: list
    base: Hyperparams = field(default_factory=Hyperparams)
    runs_per_value: int = 20
    base_seed: int = 0
    n_eval_episodes: int = 1000
    record_duels: bool = False

    def __post_init__(self):
        if self.parameter not in _SWEEPABLE:
            raise ValueError(f"unknown sweep parameter {self.parameter!r}")
        if not self.values:
            raise ValueError("values must be nonempty")
        if self.runs_per_value < 1:
            raise ValueError("runs_per_value must be at least 1")


@dataclass
class SweepValueResult:
    value: object
    run_means: list[float]
    mean: float
    ci_half: float
    win_rates: list[float] | None = None


@dataclass
class SweepResult:
    parameter: str
    per_value: list[SweepValueResult]
    best_value: object


def _sweep_worker(args):
    hp, seed, n_eval, record_duels = args
    report = train_agent(hp, seed)
    stats = evaluate_agent(report.q, hp, n_eval, make_rng(seed, stream=1))
    win_rate = None
    if record_duels:
        outcome = run_duels(report.q, hp, n_eval, make_rng(seed, stream=2))["snake"]
        win_rate = outcome.wins / outcome.total
    return stats.mean, win_rate


def run_sweep(spec: SweepSpec, jobs: int = 1) -> SweepResult:
    """Train and score runs_per_value agents for every candidate value.

    The same seed block base_seed .. base_seed + runs_per_value - 1 is
    reused across values so candidates face identical evaluation noise.
    Equal (spec, seeds) always reproduce the same result; ties on the
    mean go to the earlier candidate, so list cheaper values first.
    """
    work = []
    for value in spec.values:
        hp = spec.base.with_value(spec.parameter, value)
        for run in range(spec.runs_per_value):
            work.append((hp, spec.base_seed + run, spec.n_eval_episodes, spec.record_duels))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            scored = list(pool.map(_sweep_worker, work, chunksize=1))
    else:
        scored = [_sweep_worker(item) for item in work]
    per_value = []
    for i, value in enumerate(spec.values):
        block = scored[i * spec.runs_per_value:(i + 1) * spec.runs_per_value]
        run_means = [mean for mean, _ in block]
        mean, ci_half = confidence_interval(run_means)
        win_rates = [w for _, w in block] if spec.record_duels else None
        per_value.append(SweepValueResult(value, run_means, mean, ci_half, win_rates))
    best = min(range(len(per_value)), key=lambda i: per_value[i].mean)
    return SweepResult(spec.parameter, per_value, spec.values[best])


def tuning_loop(stages: list[SweepSpec], *, two_pass: bool = False,
                select_on: str = "steps", jobs: int = 1):
    """Run sweeps in order, fixing each winner before the next stage.

    With two_pass the whole plan repeats once more, starting from the
    first pass's winners.  select_on "wins" picks the value with the
    highest duel win rate instead of the lowest mean steps.  Returns
    (final Hyperparams, all SweepResults in execution order).
    """
    if select_on not in ("steps", "wins"):
        raise ValueError("select_on must be 'steps' or 'wins'")
    if not stages:
        raise ValueError("stages must be nonempty")
    hp = stages[0].base
    results: list[SweepResult] = []
    passes = 2 if two_pass else 1
    for _ in range(passes):
        for stage in stages:
            spec = dataclasses.replace(
                stage, base=hp,
                record_duels=stage.record_duels or select_on == "wins",
            )
            result = run_sweep(spec, jobs=jobs)
            if select_on == "wins":
                rates = [sum(v.win_rates) / len(v.win_rates) for v in result.per_value]
                best = max(range(len(rates)), key=lambda i: rates[i])
                result = SweepResult(result.parameter, result.per_value,
                                     spec.values[best])
            hp = hp.with_value(spec.parameter, result.best_value)
            results.append(result)
    return hp, results


def load_plan(source, base: Hyperparams, *, base_seed: int = 0,
              runs_per_value: int | None = None,
              n_eval_episodes: int = 1000):
    """Build (stages, options) from a JSON plan file or an equivalent dict.

    Plan shape: {"stages": [{"parameter": ..., "values": [...],
    "runs_per_value"?}, ...], "runs_per_value"?, "two_pass"?, "select_on"?}.
    A runs_per_value argument overrides everything in the file.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "read"):
        if hasattr(source, "read"):
            plan = json.load(source)
        else:
            with open(source) as handle:
                plan = json.load(handle)
    else:
        plan = source
    if not isinstance(plan, dict) or "stages" not in plan:
        raise ValueError("plan must be an object with a 'stages' list")
    default_runs = plan.get("runs_per_value", 20)
    stages = []
    for entry in plan["stages"]:
        runs = runs_per_value
        if runs is None:
            runs = entry.get("runs_per_value", default_runs)
        stages.append(SweepSpec(
            parameter=entry["parameter"],
            values=list(entry["values"]),
            base=base,
            runs_per_value=int(runs),
            base_seed=base_seed,
            n_eval_episodes=n_eval_episodes,
        ))
    options = {
        "two_pass": bool(plan.get("two_pass", False)),
        "select_on": plan.get("select_on", "steps"),
    }
    return stages, options
