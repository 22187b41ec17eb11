"""Episode orchestration, trajectory returns, schedules, demo trainers."""
import numpy as np
import pytest

from hmc_search.env import CloudField, make_cloud, make_rng, spawn_clouds
from hmc_search.policy import mc_update, new_qtable
from hmc_search.training import (
    Hyperparams,
    dynamic_demo,
    epsilon_at,
    run_episode,
    static_demo,
    train_agent,
    trajectory_reward,
    update_window,
)


def test_default_settings():
    hp = Hyperparams()
    assert (hp.grid_length, hp.pollution_diameter, hp.max_steps) == (20, 5, 400)
    assert (hp.num_episodes, hp.learning_rate, hp.discount_rate) == (1000, 0.1, 0.0)
    assert (hp.epsilon_start, hp.epsilon_final, hp.epsilon_decay) == (1.0, 0.0, 0.001)
    assert (hp.best_learn_value, hp.num_clouds, hp.mof_value) == (1, 1, 10.0)
    assert (hp.stop_learn_value, hp.option_length, hp.reward_scaling) == (1.0, 3, 30.0)


@pytest.mark.parametrize("override", [
    {"num_episodes": 0},
    {"learning_rate": 0.0},
    {"learning_rate": 1.5},
    {"discount_rate": -0.1},
    {"epsilon_start": 0.2, "epsilon_final": 0.5},
    {"epsilon_decay": -1.0},
    {"best_learn_value": 0},
    {"num_clouds": 0},
    {"mof_value": -1.0},
    {"stop_learn_value": 0.0},
    {"stop_learn_value": 1.5},
    {"option_length": 0},
    {"reward_scaling": 0.0},
    {"grid_length": 4, "pollution_diameter": 5},
])
def test_hyperparams_validation(override):
    with pytest.raises(ValueError):
        Hyperparams(**override)


def test_with_value_returns_modified_copy():
    hp = Hyperparams()
    changed = hp.with_value("option_length", 5)
    assert changed.option_length == 5
    assert hp.option_length == 3


def test_trajectory_reward_examples():
    assert trajectory_reward(30.0, 60, 1) == 0.5
    assert trajectory_reward(30.0, 400, 4) == pytest.approx(0.3)
    assert trajectory_reward(30.0, 123, 0) == 0.0
    with pytest.raises(ValueError):
        trajectory_reward(30.0, 0, 1)
    with pytest.raises(ValueError):
        trajectory_reward(float("nan"), 10, 1)


def test_epsilon_schedule_normalized():
    hp = Hyperparams()
    assert epsilon_at(0, hp) == 1.0
    assert epsilon_at(500, hp) == 0.5
    assert epsilon_at(1000, hp) == 0.0
    assert epsilon_at(5000, hp) == 0.0
    # The midpoint is exact for any episode count.
    hp2 = Hyperparams(num_episodes=2000)
    assert epsilon_at(1000, hp2) == 0.5


def test_epsilon_schedule_literal_decay():
    hp = Hyperparams(normalize_epsilon_decay=False, epsilon_decay=0.01)
    assert epsilon_at(0, hp) == 1.0
    assert epsilon_at(50, hp) == pytest.approx(0.5)
    assert epsilon_at(200, hp) == 0.0
    with pytest.raises(ValueError):
        epsilon_at(-1, hp)


def test_update_window():
    assert update_window(Hyperparams()) == 1000
    assert update_window(Hyperparams(stop_learn_value=0.5)) == 500
    assert update_window(Hyperparams(num_episodes=3, stop_learn_value=0.5)) == 2


def test_adjacent_cloud_found_in_one_step():
    # Detection happens on entry, so the fastest possible find is one step.
    hp = Hyperparams(pollution_diameter=1)
    field = CloudField([make_cloud((0, 1), 1, 20)], 20)
    traj = run_episode(new_qtable(20), hp, "eval", None, field=field)
    assert traj.n_step == 1
    assert traj.n_poll == 1
    assert traj.r_t == 30.0


def test_budget_exhaustion_gives_zero_reward():
    hp = Hyperparams(pollution_diameter=1, max_steps=3)
    field = CloudField([make_cloud((19, 19), 1, 20)], 20)
    traj = run_episode(new_qtable(20), hp, "eval", None, field=field)
    assert traj.n_step == 3
    assert traj.n_poll == 0
    assert traj.r_t == 0.0


def test_eval_episode_is_deterministic():
    hp = Hyperparams()
    field = spawn_clouds(hp.grid(), 1, make_rng(2))
    q = new_qtable(20)
    q[:] = make_rng(3).normal(size=q.shape)
    first = run_episode(q, hp, "eval", None, field=field)
    second = run_episode(q, hp, "eval", None, field=field)
    assert first.transitions == second.transitions
    assert first.cells == second.cells
    assert (first.n_step, first.n_poll, first.r_t) == (second.n_step, second.n_poll, second.r_t)


def test_trajectory_accounting():
    hp = Hyperparams()
    rng = make_rng(6)
    for _ in range(20):
        traj = run_episode(new_qtable(20), hp, "train", rng, epsilon=1.0)
        assert traj.n_step <= hp.max_steps
        assert len(traj.cells) == traj.n_step + 1
        assert traj.cells[0] == (0, 0)
        if traj.n_poll > 0:
            assert traj.r_t == trajectory_reward(30.0, traj.n_step, traj.n_poll)
        else:
            assert traj.r_t == 0.0


def test_eval_mode_spawns_exactly_one_cloud():
    hp = Hyperparams(num_clouds=4)
    rng = make_rng(5)
    run_episode(new_qtable(20), hp, "eval", rng)
    # Greedy evaluation must consume exactly the two spawn draws.
    reference = make_rng(5)
    reference.integers(20)
    reference.integers(20)
    assert rng.random() == reference.random()


def test_multi_cloud_training_counts_every_find():
    hp = Hyperparams(num_episodes=30, num_clouds=4)
    report = train_agent(hp, 0)
    assert max(r.n_poll for r in report.records) > 1
    assert all(r.n_poll <= 4 for r in report.records)


def test_run_episode_rejects_unknown_mode():
    with pytest.raises(ValueError):
        run_episode(new_qtable(20), Hyperparams(), "test", make_rng(0))


def test_train_agent_is_deterministic():
    hp = Hyperparams(num_episodes=60)
    a = train_agent(hp, 42)
    b = train_agent(hp, 42)
    assert np.array_equal(a.q, b.q)
    assert [(r.n_step, r.n_poll) for r in a.records] == \
        [(r.n_step, r.n_poll) for r in b.records]
    assert len(a.records) == 60


def test_failed_single_episode_leaves_table_untouched():
    hp = Hyperparams(num_episodes=1, max_steps=8)
    report = train_agent(hp, 0)
    assert report.records[0].n_poll == 0
    assert not report.q.any()


def test_single_episode_updates_match_manual_replay():
    # The kept trajectory is backed up every-visit, in order, with the
    # trajectory return; replaying the episode from the same draws must
    # reproduce the trained table exactly.
    hp = Hyperparams(num_episodes=1, max_steps=8)
    report = train_agent(hp, 11)
    assert report.records[0].n_poll == 1

    rng = make_rng(11)
    field = spawn_clouds(hp.grid(), 1, rng)
    traj = run_episode(new_qtable(20), hp, "train", rng, field=field, epsilon=1.0)
    expected = new_qtable(20)
    for s, o in traj.transitions:
        mc_update(expected, s, o, traj.r_t, hp.learning_rate)
    assert np.array_equal(report.q, expected)
    assert expected.any()


def test_stop_learn_freezes_the_table():
    # With permanent full exploration the episode stream is a pure
    # function of the seed, so a run twice as long with learning stopped
    # halfway must end at the same table as the short full run.
    base = dict(epsilon_start=1.0, epsilon_final=1.0)
    short = train_agent(Hyperparams(num_episodes=40, stop_learn_value=1.0, **base), 5)
    long = train_agent(Hyperparams(num_episodes=80, stop_learn_value=0.5, **base), 5)
    assert short.q.any()
    assert np.array_equal(short.q, long.q)


def test_best_of_attempts_raises_kept_returns():
    one = train_agent(Hyperparams(num_episodes=30, best_learn_value=1), 3)
    five = train_agent(Hyperparams(num_episodes=30, best_learn_value=5), 3)
    assert sum(r.r_t for r in five.records) > sum(r.r_t for r in one.records)


def test_gamma_zero_and_positive_paths_both_run():
    for gamma in (0.0, 0.9):
        report = train_agent(Hyperparams(num_episodes=40, discount_rate=gamma), 1)
        assert report.q.any()


# --- plain Q-learning demos


def test_static_demo_snapshot_zero_is_blank():
    snaps = static_demo(Hyperparams(), 0, n_episodes=50,
                        snapshot_episodes=(0, 50))
    assert set(snaps) == {0, 50}
    assert not snaps[0].any()
    assert snaps[0].shape == (20, 20)


def test_dynamic_demo_first_episode_marks_only_cloud_approaches():
    # Without a discount, only moves that land on the cloud earn reward,
    # so after one episode every nonzero cell must be on the cloud or
    # one step away from it.
    snaps, _ = dynamic_demo(Hyperparams(), 1, n_episodes=5,
                            snapshot_episodes=(1,), n_eval_episodes=1)
    touched = {(int(x), int(y)) for x, y in np.argwhere(snaps[1] != 0)}
    assert touched
    rng = make_rng(1)
    first_cloud = spawn_clouds(Hyperparams().grid(), 1, rng)
    allowed = set()
    for cloud in first_cloud.clouds:
        for (x, y) in cloud.support:
            allowed.add((x, y))
            allowed.update(((x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)))
    assert touched <= allowed


def test_dynamic_demo_returns_mean_in_budget():
    _, mean_steps = dynamic_demo(Hyperparams(), 0, n_episodes=60,
                                 snapshot_episodes=(), n_eval_episodes=40)
    assert 0.0 < mean_steps <= 400.0


def test_static_demo_values_grow_toward_cloud():
    hp = Hyperparams(discount_rate=0.9)
    snaps = static_demo(hp, 0, n_episodes=400, snapshot_episodes=(100, 400))
    assert snaps[400].max() > snaps[100].max() * 0.5
    assert snaps[400].max() > 0
