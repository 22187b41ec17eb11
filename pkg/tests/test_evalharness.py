"""Tests for evaluation statistics, duels, score maps, and populations."""
import numpy as np
import pytest

from hmc_search.baselines import snake_path, spiral_path, steps_to_find
from hmc_search.env import CloudField, make_cloud, make_rng, spawn_clouds
from hmc_search.evalharness import (
    LOSS,
    TIE,
    WIN,
    DuelOutcome,
    EvalStats,
    duel,
    evaluate_agent,
    population_stats,
    route_heatmap,
    run_duels,
    score_map,
)
from hmc_search.policy import new_qtable
from hmc_search.training import Hyperparams, run_episode, train_agent

QUICK = Hyperparams(num_episodes=40, max_steps=80)


def trained_table(seed=3):
    return train_agent(QUICK, seed).q


def test_eval_stats_lower_median_even():
    stats = EvalStats.from_steps([4, 1, 3, 2], failures=0)
    assert stats.mean == 2.5
    assert stats.median == 2.0
    assert stats.steps == [4, 1, 3, 2]


def test_eval_stats_odd_and_failures():
    stats = EvalStats.from_steps([5, 1, 9], failures=2)
    assert stats.mean == 5.0
    assert stats.median == 5.0
    assert stats.failures == 2


def test_duel_verdicts():
    assert duel(3, 5) == WIN
    assert duel(5, 5) == TIE
    assert duel(7, 5) == LOSS


def test_duel_antisymmetry():
    for a in range(4):
        for b in range(4):
            flipped = {WIN: LOSS, LOSS: WIN, TIE: TIE}[duel(a, b)]
            assert duel(b, a) == flipped


def test_duel_outcome_tally():
    outcome = DuelOutcome()
    for verdict in (WIN, WIN, TIE, LOSS):
        outcome.add(verdict)
    assert (outcome.wins, outcome.ties, outcome.losses) == (2, 1, 1)
    assert outcome.total == 4


def test_evaluate_agent_rejects_empty_batch():
    with pytest.raises(ValueError):
        evaluate_agent(new_qtable(20), QUICK, 0, make_rng(0, stream=1))


def test_evaluate_agent_matches_manual_episodes():
    q = trained_table()
    stats = evaluate_agent(q, QUICK, 30, make_rng(7, stream=1))
    rng = make_rng(7, stream=1)
    expected = []
    failures = 0
    for _ in range(30):
        traj = run_episode(q, QUICK, "eval", rng)
        if traj.n_poll > 0:
            expected.append(traj.n_step)
        else:
            expected.append(QUICK.max_steps)
            failures += 1
    assert stats.steps == expected
    assert stats.failures == failures
    assert stats.mean == sum(expected) / 30


def test_evaluate_agent_is_reproducible():
    q = trained_table()
    first = evaluate_agent(q, QUICK, 25, make_rng(11, stream=1))
    second = evaluate_agent(q, QUICK, 25, make_rng(11, stream=1))
    assert first.steps == second.steps


def test_run_duels_matches_manual_replay():
    q = trained_table()
    cfg = QUICK.grid()
    outcomes = run_duels(q, QUICK, 40, make_rng(5, stream=2))
    assert set(outcomes) == {"snake", "spiral"}

    patterns = {
        "snake": snake_path(cfg.grid_length, cfg.pollution_diameter),
        "spiral": spiral_path(cfg.grid_length, cfg.pollution_diameter),
    }
    rng = make_rng(5, stream=2)
    expected = {name: DuelOutcome() for name in patterns}
    for _ in range(40):
        field = spawn_clouds(cfg, 1, rng)
        traj = run_episode(q, QUICK, "eval", None, field=field)
        agent = traj.n_step if traj.n_poll > 0 else QUICK.max_steps
        for name, pattern in patterns.items():
            opponent = steps_to_find(pattern, field.clouds[0], cfg.max_steps)
            expected[name].add(duel(agent, opponent))
    for name in patterns:
        assert outcomes[name] == expected[name]
        assert outcomes[name].total == 40


def test_run_duels_rejects_empty_batch():
    with pytest.raises(ValueError):
        run_duels(new_qtable(20), QUICK, 0, make_rng(0, stream=2))


SMALL = Hyperparams(grid_length=6, pollution_diameter=3, max_steps=40,
                    num_episodes=30, option_length=1)


def test_score_map_covers_every_center():
    q = train_agent(SMALL, 1).q
    pattern = snake_path(6, 3)
    smap = score_map(q, SMALL, pattern)
    assert smap.opponent == "snake"
    assert smap.outcome.shape == (6, 6)
    assert smap.wins + smap.ties + smap.losses == 36


def test_score_map_matches_manual_duels():
    q = train_agent(SMALL, 1).q
    pattern = spiral_path(6, 3)
    smap = score_map(q, SMALL, pattern)
    code = {WIN: 1, TIE: 0, LOSS: -1}
    for x in range(6):
        for y in range(6):
            cloud = make_cloud((x, y), 3, 6)
            traj = run_episode(q, SMALL, "eval", None,
                               field=CloudField([cloud], 6))
            agent = traj.n_step if traj.n_poll > 0 else SMALL.max_steps
            opponent = steps_to_find(pattern, cloud, SMALL.max_steps)
            assert smap.agent_steps[x, y] == agent
            assert smap.opponent_steps[x, y] == opponent
            assert smap.outcome[x, y] == code[duel(agent, opponent)]


def test_score_map_is_deterministic():
    q = train_agent(SMALL, 2).q
    pattern = snake_path(6, 3)
    first = score_map(q, SMALL, pattern)
    second = score_map(q, SMALL, pattern)
    assert np.array_equal(first.outcome, second.outcome)
    assert np.array_equal(first.agent_steps, second.agent_steps)


def test_route_heatmap_accounting():
    q = trained_table()
    counts = route_heatmap(q, QUICK, 20, make_rng(9, stream=1))
    rng = make_rng(9, stream=1)
    total = sum(run_episode(q, QUICK, "eval", rng).n_step + 1
                for _ in range(20))
    assert int(counts.sum()) == total
    # Every episode starts at the corner, so its count is at least the
    # episode count.
    assert counts[0, 0] >= 20


def test_population_stats_rejects_empty():
    with pytest.raises(ValueError):
        population_stats(QUICK, 0, 0)


def test_population_single_agent_matches_components():
    report = population_stats(QUICK, 1, 13, n_eval=30, n_duel=25)
    assert len(report.agents) == 1
    agent = report.agents[0]
    assert agent.seed == 13

    q = train_agent(QUICK, 13).q
    stats = evaluate_agent(q, QUICK, 30, make_rng(13, stream=1))
    duels = run_duels(q, QUICK, 25, make_rng(13, stream=2))["snake"]
    assert agent.mean_steps == stats.mean
    assert agent.median_steps == stats.median
    assert agent.failures == stats.failures
    assert (agent.wins, agent.ties, agent.losses) == (
        duels.wins, duels.ties, duels.losses)
    assert agent.win_pct == 100.0 * duels.wins / duels.total


def test_population_histograms_conserve_agents():
    report = population_stats(QUICK, 3, 0, n_eval=20, n_duel=20)
    steps_edges, steps_counts = report.steps_hist
    win_edges, win_counts = report.win_hist
    assert len(steps_edges) == 41 and len(steps_counts) == 40
    assert len(win_edges) == 21 and len(win_counts) == 20
    assert int(steps_counts.sum()) == 3
    assert int(win_counts.sum()) == 3
    for agent in report.agents:
        assert 0.0 <= agent.win_pct <= 100.0
