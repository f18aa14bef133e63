import math

import numpy as np
import pytest

from conftest import belief_over
from liftedts.agent import PolicySnapshot, exact_policy, monte_carlo_policy, optimal_action, ts_act
from liftedts.model import LogisticLinear, TabularBernoulli


def within_3sd(count, n, p):
    return abs(count - n * p) <= 3 * math.sqrt(n * p * (1 - p))


def test_point_mass_plays_its_optimum(rng):
    belief, model = belief_over([[0.9, 0.1, 0.5]], [1.0])
    assert ts_act(belief, model, 0, rng) == 1
    np.testing.assert_array_equal(exact_policy(belief, model, 0).action_probs, [0, 1, 0])


def test_symmetric_two_atoms(rng):
    belief, model = belief_over([[0.0, 1.0], [1.0, 0.0]], [0.5, 0.5])
    acts = ts_act(belief, model, 0, rng, size=100_000)
    assert within_3sd(int(np.sum(acts == 0)), 100_000, 0.5)


def test_probability_matching_unequal(rng):
    belief, model = belief_over([[0.0, 1.0], [1.0, 0.0]], [0.2, 0.8])
    acts = ts_act(belief, model, 0, rng, size=100_000)
    assert within_3sd(int(np.sum(acts == 1)), 100_000, 0.8)


def test_exact_policy_examples():
    belief, model = belief_over([[0.5, 0.4, 0.1], [0.6, 0.3, 0.2]], [0.5, 0.5])
    np.testing.assert_array_equal(exact_policy(belief, model, 0).action_probs, [0, 0, 1])
    belief, model = belief_over([[0.1, 0.9], [0.9, 0.1]], [0.3, 0.7])
    np.testing.assert_allclose(exact_policy(belief, model, 0).action_probs, [0.3, 0.7])


def test_ties_go_to_lowest_index():
    tab = TabularBernoulli(np.array([[[0.5, 0.5]], [[1.0, 0.0]]]))
    assert optimal_action(tab, 0, 0) == 0
    assert optimal_action(tab, 1, 0) == 1


def test_logistic_optimal_action():
    model = LogisticLinear(np.array([[[1.0, 0.0], [0.0, 1.0]]]))
    assert optimal_action(model, np.array([1.0, 0.0]), 0) == 1


def test_monte_carlo_policy_is_marked_and_close(rng):
    belief, model = belief_over([[0.1, 0.9], [0.9, 0.1]], [0.3, 0.7])
    est = monte_carlo_policy(belief, model, 0, rng, 20_000)
    assert est.approximate
    np.testing.assert_allclose(est.action_probs, [0.3, 0.7], atol=0.02)


def test_policy_snapshot_validates():
    with pytest.raises(ValueError):
        PolicySnapshot(np.array([0.5, 0.6]))
    with pytest.raises(ValueError):
        PolicySnapshot(np.array([1.5, -0.5]))


def test_context_out_of_range(rng):
    belief, model = belief_over([[0.1, 0.9]], [1.0])
    with pytest.raises((IndexError, ValueError)):
        ts_act(belief, model, 3, rng)
