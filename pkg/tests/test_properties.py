import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import belief_over
from liftedts.agent import exact_policy
from liftedts.belief import update_discrete
from liftedts.geometry import ball_cover_bound, bound_gaussian, bound_theorem3, bound_theorem4, build_cover
from liftedts.infodiag import (
    binary_relative_entropy,
    conjugate_g,
    expected_instant_regret,
    lifted_information_gain,
    lifted_information_ratio,
    posterior_loss_variance,
    posterior_mean_loss,
)
from liftedts.model import ParameterGrid

probs = st.floats(0.0, 1.0, allow_nan=False)


@st.composite
def tabular_beliefs(draw, max_atoms=12, max_actions=6):
    n = draw(st.integers(1, max_atoms))
    k = draw(st.integers(1, max_actions))
    table = draw(arrays(float, (n, k), elements=probs))
    w = draw(arrays(float, n, elements=st.floats(0.0, 1.0)))
    assume(w.sum() > 1e-6)
    return belief_over(table, w)


@given(probs, probs)
def test_relative_entropy_nonnegative(p, q):
    assert binary_relative_entropy(p, q) >= 0.0


@given(st.floats(-50.0, 0.0), probs)
def test_conjugate_quadratic_bound(u, q):
    assert conjugate_g(u, q) <= q * (u + u * u / 2) + 1e-12


@given(tabular_beliefs())
@settings(max_examples=200, deadline=None)
def test_regret_information_inequalities(case):
    belief, model = case
    pi = exact_policy(belief, model, 0)
    regret = expected_instant_regret(belief, pi, model, 0)
    gain = lifted_information_gain(belief, pi, model, 0)
    lbar_sum = float(posterior_mean_loss(belief, model, 0).sum())
    assert regret >= -1e-12
    assert regret <= math.sqrt(2 * gain * lbar_sum) + 1e-10
    assert gain >= 2 * posterior_loss_variance(belief, pi, model, 0) - 1e-10
    rho = lifted_information_ratio(belief, pi, model, 0)
    if rho is None:
        assert regret <= 1e-7
    else:
        assert rho <= 2 * model.n_actions + 1e-9


@given(tabular_beliefs(), st.lists(st.tuples(st.integers(0, 5), st.integers(0, 1)), min_size=1, max_size=8))
@settings(max_examples=100, deadline=None)
def test_updates_commute_and_normalise(case, obs):
    belief, model = case
    obs = [(a % model.n_actions, l) for a, l in obs]
    # keep only observations the belief can explain
    fwd, bwd = belief, belief
    try:
        for a, l in obs:
            fwd = update_discrete(fwd, model, 0, a, l)
        for a, l in reversed(obs):
            bwd = update_discrete(bwd, model, 0, a, l)
    except ValueError:
        assume(False)
    assert np.all(fwd.weights >= 0) and math.isclose(fwd.weights.sum(), 1.0, rel_tol=1e-12)
    np.testing.assert_allclose(fwd.weights, bwd.weights, atol=1e-10)


@given(st.integers(1, 3), st.floats(0.2, 2.0), st.floats(0.05, 1.5), st.integers(0, 2**32 - 1))
@settings(max_examples=40, deadline=None)
def test_cover_postconditions(dim, radius, eps, seed):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((200, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    pts = radius * v * rng.random((200, 1)) ** (1.0 / dim)
    cover = build_cover(ParameterGrid.from_vectors(pts, radius=radius), eps)
    assert np.linalg.norm(pts - cover.center_points()[cover.assignment], axis=1).max() <= eps + 1e-12
    assert cover.n_cells <= ball_cover_bound(radius, dim, eps)


@given(st.integers(1, 10), st.integers(1, 500), st.integers(2, 40))
def test_bounds_grow_with_horizon_and_actions(k, t, n):
    assert bound_theorem3(k, t + 1, n) >= bound_theorem3(k, t, n)
    assert bound_theorem3(k + 1, t, n) >= bound_theorem3(k, t, n)
    assert bound_theorem4(k + 1, t + 1, 2, 1.0, 1.0) >= bound_theorem4(k, t, 2, 1.0, 1.0)
    assert bound_gaussian(2, t + 1, k + 1, 1.0, 1.0, 1.0) >= bound_gaussian(2, t, k, 1.0, 1.0, 1.0)
