import math

import numpy as np
import pytest

from liftedts.belief import GaussianBelief
from liftedts.environment import (
    REVEAL_ACTION,
    AdaptiveCallback,
    FixedSequence,
    IIDUniform,
    RoundRobin,
    revealing_instance,
    run_episode,
)
from liftedts.geometry import bound_theorem3
from liftedts.harness.seeding import run_rng
from liftedts.model import GaussianLinear, ParameterGrid, TabularBernoulli, tabulate


def test_single_atom_has_zero_regret():
    model = TabularBernoulli(np.random.default_rng(0).random((1, 3, 4)))
    rec = run_episode(ParameterGrid.tabular(1), model, IIDUniform(3), 50, np.random.default_rng(1))
    assert rec.cumulative_regret[-1] == 0.0


def test_one_action_has_zero_regret():
    model = TabularBernoulli(np.random.default_rng(0).random((5, 2, 1)))
    rec = run_episode(ParameterGrid.tabular(5), model, RoundRobin(2), 50, np.random.default_rng(1))
    assert np.all(rec.instant_regrets == 0.0)


def test_two_atom_regret_under_bound():
    model = TabularBernoulli(np.array([[[0.3, 0.7]], [[0.6, 0.4]]]))
    grid = ParameterGrid.tabular(2)
    tables = tabulate(model, grid)
    finals = np.array([
        run_episode(grid, model, IIDUniform(1), 200, run_rng(99, i), tables=tables).cumulative_regret[-1]
        for i in range(2000)
    ])
    se = finals.std(ddof=1) / math.sqrt(finals.size)
    assert finals.mean() + 3 * se <= bound_theorem3(2, 200, 2)
    assert bound_theorem3(2, 200, 2) == pytest.approx(23.55, abs=0.01)


def test_episode_is_reproducible():
    model = TabularBernoulli(np.random.default_rng(0).random((8, 3, 3)))
    grid = ParameterGrid.tabular(8)
    a = run_episode(grid, model, IIDUniform(3), 100, np.random.default_rng(5))
    b = run_episode(grid, model, IIDUniform(3), 100, np.random.default_rng(5))
    assert a.trajectory == b.trajectory and a.true_atom == b.true_atom
    np.testing.assert_array_equal(a.final_belief.log_weights, b.final_belief.log_weights)


def test_diagnostics_do_not_change_the_trajectory():
    model = TabularBernoulli(np.random.default_rng(0).random((8, 3, 3)))
    grid = ParameterGrid.tabular(8)
    a = run_episode(grid, model, IIDUniform(3), 60, np.random.default_rng(5))
    b = run_episode(grid, model, IIDUniform(3), 60, np.random.default_rng(5), diagnostics=True)
    assert a.trajectory == b.trajectory
    assert all(r.diagnostics is not None for r in b.rounds)


def test_adversaries():
    assert [FixedSequence([2, 0]).next_context(_hist(i), None) for i in range(4)] == [2, 0, 2, 0]
    assert [RoundRobin(3).next_context(_hist(i), None) for i in range(4)] == [0, 1, 2, 0]
    with pytest.raises(ValueError):
        FixedSequence([0, 3], n_contexts=2)
    with pytest.raises(ValueError):
        IIDUniform(2, [0.7, 0.7])
    bad = AdaptiveCallback(lambda h, r: 5, 2)
    with pytest.raises(ValueError):
        bad.next_context(_hist(0), None)


def _hist(n):
    from liftedts.environment import History

    h = History()
    for _ in range(n):
        h._append(0, 0, 0)
    return h


def test_adaptive_adversary_sees_history_only():
    seen = []

    def pick(history, rng):
        seen.append(len(history))
        assert not hasattr(history, "true_atom")
        return len(history.actions) % 2

    model = TabularBernoulli(np.random.default_rng(0).random((4, 2, 2)))
    run_episode(ParameterGrid.tabular(4), model, AdaptiveCallback(pick, 2), 10, np.random.default_rng(0))
    assert seen == list(range(10))


def test_gaussian_episode_records_potentials():
    feats = np.random.default_rng(0).standard_normal((3, 2, 2))
    feats /= np.linalg.norm(feats, axis=-1, keepdims=True)
    model = GaussianLinear(feats, 1.0)
    rec = run_episode(GaussianBelief.prior(2), model, IIDUniform(3), 40, np.random.default_rng(2))
    assert rec.true_atom is None
    assert all(r.potential is not None and r.potential > 0 for r in rec.rounds)
    assert np.all(rec.instant_regrets >= 0)
    assert rec.final_belief.t == 40


def test_gaussian_prior_needs_gaussian_model():
    model = TabularBernoulli(np.full((2, 1, 2), 0.5))
    with pytest.raises(ValueError):
        run_episode(GaussianBelief.prior(2), model, IIDUniform(1), 5, np.random.default_rng(0))


def test_revealing_instance_losses():
    grid, model, adversary = revealing_instance(2, 2)
    assert grid.size == 4
    for i in range(grid.size):
        for x in range(2):
            row = model.table[i, x]
            a_star = int(np.argmin(row))
            assert row[REVEAL_ACTION] == pytest.approx(1 - 10.0 ** -(a_star + 1))
    # label 2 optimal: reveal loss 0.99; label 1 (the reveal action) optimal: 0.9
    rows = model.table[:, 0, :]
    assert sorted(np.round(rows[:, REVEAL_ACTION], 6).tolist()) == [0.9, 0.9, 0.99, 0.99]
    with pytest.raises(ValueError):
        revealing_instance(7)
