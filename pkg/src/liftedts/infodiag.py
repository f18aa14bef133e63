"""Information-theoretic diagnostics of a Thompson Sampling round.

Over discrete beliefs every quantity is an exact finite sum over atoms and
actions. Gaussian beliefs get closed forms where they exist and explicitly
labelled Monte Carlo estimates where they do not.

Ratios that are 0/0 (no information gained, no regret incurred) are returned as
``None`` rather than 0 or NaN.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np
from scipy.special import rel_entr

from .agent import PolicySnapshot, exact_policy
from .belief import DiscreteBelief, GaussianBelief, posterior_sample
from .model import BanditModel

__all__ = [
    "RoundDiagnostics",
    "GaussianRoundQuantities",
    "binary_relative_entropy",
    "conjugate_g",
    "conjugate_sup_oracle",
    "posterior_mean_loss",
    "lifted_information_gain",
    "expected_instant_regret",
    "posterior_loss_variance",
    "lifted_information_ratio",
    "decoupling_coefficient",
    "regret_matrix",
    "numerical_rank",
    "gaussian_round_quantities",
    "gaussian_regret_estimate",
    "round_diagnostics",
    "gaussian_round_diagnostics",
]

# denominators at or below this are treated as exactly zero
ZERO_TOL = 1e-15
RANK_RTOL = 1e-9


def binary_relative_entropy(p, q):
    """``g(p||q) = p log(p/q) + (1-p) log((1-p)/(1-q))`` with ``0 log 0 = 0``.

    Returns ``+inf`` when ``q`` is 0 or 1 and ``p`` disagrees.
    """
    p_arr = np.asarray(p, dtype=float)
    q_arr = np.asarray(q, dtype=float)
    if np.any((p_arr < 0) | (p_arr > 1)) or np.any((q_arr < 0) | (q_arr > 1)):
        raise ValueError("binary relative entropy needs p, q in [0, 1]")
    # the two terms can cancel to a tiny negative number when p is close to q
    out = np.maximum(rel_entr(p_arr, q_arr) + rel_entr(1.0 - p_arr, 1.0 - q_arr), 0.0)
    return float(out) if out.ndim == 0 else out


def conjugate_g(u, q):
    """Closed-form conjugate ``g*(u||q) = log(1 + q (e^u - 1))``."""
    u = np.asarray(u, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any((q < 0) | (q > 1)):
        raise ValueError("q must lie in [0, 1]")
    with np.errstate(divide="ignore"):
        out = np.log1p(q * np.expm1(u))
    return float(out) if out.ndim == 0 else out


def conjugate_sup_oracle(u: float, q: float, grid_points: int = 100_000) -> float:
    """Brute-force ``max_p {p u - g(p||q)}`` over a uniform grid of ``p`` in [0, 1]."""
    if grid_points < 1000:
        raise ValueError("use at least 1000 grid points")
    p = np.linspace(0.0, 1.0, grid_points)
    with np.errstate(invalid="ignore"):
        vals = p * u - binary_relative_entropy(p, np.full_like(p, q))
    vals = np.where(np.isnan(vals), -np.inf, vals)
    return float(vals.max())


def posterior_mean_loss(belief: DiscreteBelief, model: BanditModel, x: int, a: Optional[int] = None):
    """``lbar_t(x, a) = sum_theta Q_t(theta) l(theta, x, a)``; all actions when ``a`` is None."""
    means = belief.weights @ belief.mean_table(model, x)
    if model.bernoulli:
        means = np.clip(means, 0.0, 1.0)
    return means if a is None else float(means[a])


def _check_policy(policy: PolicySnapshot, model: BanditModel) -> np.ndarray:
    if policy.n_actions != model.n_actions:
        raise ValueError("policy and model disagree on the number of actions")
    return policy.action_probs


def lifted_information_gain(belief: DiscreteBelief, policy: PolicySnapshot, model: BanditModel, x: int) -> float:
    """``I_t(theta*; L_t) = sum_a pi(a) sum_theta Q_t(theta) g(l(theta, x, a) || lbar(x, a))``."""
    if not model.bernoulli:
        raise ValueError("lifted information gain in closed form needs Bernoulli losses")
    pi = _check_policy(policy, model)
    w = belief.weights
    table = belief.mean_table(model, x)
    lbar = posterior_mean_loss(belief, model, x)
    live = w > 0
    g = binary_relative_entropy(table[live], np.broadcast_to(lbar, table[live].shape))
    per_action = w[live] @ g
    return float(pi @ np.where(pi > 0, per_action, 0.0))


def expected_instant_regret(belief: DiscreteBelief, policy: PolicySnapshot, model: BanditModel, x: int) -> float:
    """``sum_a pi(a) lbar(x, a) - sum_theta Q_t(theta) min_a l(theta, x, a)``."""
    pi = _check_policy(policy, model)
    table = belief.mean_table(model, x)
    lbar = belief.weights @ table
    return float(pi @ lbar - belief.weights @ table.min(axis=1))


def posterior_loss_variance(belief: DiscreteBelief, policy: PolicySnapshot, model: BanditModel, x: int) -> float:
    """``sum_a pi(a) sum_theta Q_t(theta) (lbar(x, a) - l(theta, x, a))^2``."""
    pi = _check_policy(policy, model)
    table = belief.mean_table(model, x)
    lbar = belief.weights @ table
    return float(pi @ (belief.weights @ (table - lbar) ** 2))


def _ratio(num: float, den: float) -> Optional[float]:
    return None if den <= ZERO_TOL else num * num / den


def lifted_information_ratio(
    belief: DiscreteBelief, policy: PolicySnapshot, model: BanditModel, x: int
) -> Optional[float]:
    """Squared expected regret over lifted information gain; ``None`` when the gain is zero."""
    return _ratio(
        expected_instant_regret(belief, policy, model, x),
        lifted_information_gain(belief, policy, model, x),
    )


def decoupling_coefficient(
    belief: DiscreteBelief, policy: PolicySnapshot, model: BanditModel, x: int
) -> Optional[float]:
    """Squared expected regret over posterior loss variance; ``None`` when the variance is zero."""
    return _ratio(
        expected_instant_regret(belief, policy, model, x),
        posterior_loss_variance(belief, policy, model, x),
    )


def regret_matrix(belief: DiscreteBelief, model: BanditModel, x: int) -> np.ndarray:
    """``M[a, a'] = sqrt(lam_a lam_a') (lbar(x, a) - E[l(theta*, x, a) | A* = a'])``.

    ``lam`` is the exact Thompson Sampling policy; rows and columns of actions
    that are never optimal are zero.
    """
    table = belief.mean_table(model, x)
    w = belief.weights
    k = model.n_actions
    best = np.argmin(table, axis=1)
    lam = np.bincount(best, weights=w, minlength=k)
    lbar = w @ table
    cond = np.zeros((k, k))  # cond[a, a'] = E[l(theta, x, a) | A* = a']
    for a_opt in range(k):
        if lam[a_opt] > 0:
            mask = best == a_opt
            cond[:, a_opt] = (w[mask] @ table[mask]) / lam[a_opt]
    scale = np.sqrt(np.outer(lam, lam))
    return np.where(scale > 0, scale * (lbar[:, None] - cond), 0.0)


def numerical_rank(matrix: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Number of singular values above ``rtol`` times the largest one."""
    s = np.linalg.svd(matrix, compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


# ---------------------------------------------------------------------------
# Gaussian-linear rounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GaussianRoundQuantities:
    """Per-action predictive variances and both versions of the information gain.

    ``info_gain_surrogate`` is the played-distribution average of the
    predictive variances; ``info_gain_exact`` is the Gaussian mutual
    information ``sum_a pi(a) 0.5 log(1 + sigma_a^2 / noise_var)``.
    """

    sigma_sq: np.ndarray
    info_gain_exact: float
    info_gain_surrogate: float


def gaussian_round_quantities(belief: GaussianBelief, features, policy_probs) -> GaussianRoundQuantities:
    phi = np.atleast_2d(np.asarray(features, dtype=float))
    pi = np.asarray(policy_probs, dtype=float)
    if phi.shape[0] != pi.shape[0]:
        raise ValueError("need one feature vector per action")
    sigma_sq = belief.predictive_variance(phi)
    exact = 0.5 * np.log1p(sigma_sq / belief.noise_var)
    return GaussianRoundQuantities(sigma_sq, float(pi @ exact), float(pi @ sigma_sq))


def gaussian_regret_estimate(belief: GaussianBelief, features, rng: np.random.Generator, n_draws: int):
    """Monte Carlo estimate of the Thompson Sampling expected regret at one round.

    Uses ``E_t[lbar(x, A_t) - l(theta_t, x, A_t)]`` with ``theta_t`` drawn from
    the posterior. Returns ``(estimate, standard_error, policy)``.
    """
    phi = np.atleast_2d(np.asarray(features, dtype=float))
    thetas = posterior_sample(belief, rng, size=n_draws)
    losses = thetas @ phi.T
    actions = np.argmin(losses, axis=1)
    lbar = phi @ belief.mean
    gaps = lbar[actions] - losses[np.arange(n_draws), actions]
    probs = np.bincount(actions, minlength=phi.shape[0]) / n_draws
    se = gaps.std(ddof=1) / np.sqrt(n_draws) if n_draws > 1 else np.inf
    return float(gaps.mean()), float(se), PolicySnapshot(probs, approximate=True)


# ---------------------------------------------------------------------------
# Per-round records
# ---------------------------------------------------------------------------


@dataclass
class RoundDiagnostics:
    """Diagnostics of one round, evaluated against the pre-update belief.

    ``bound_checks`` maps a check name to its slack (limit minus observed);
    a negative slack is a violation.
    """

    expected_regret: float
    info_gain: float
    lifted_ratio: Optional[float]
    decoupling: Optional[float]
    posterior_variance: float
    bound_checks: Dict[str, float] = field(default_factory=dict)
    extras: Dict[str, float] = field(default_factory=dict)


def round_diagnostics(belief: DiscreteBelief, model: BanditModel, x: int) -> RoundDiagnostics:
    """All exact diagnostics of a Thompson Sampling round over a discrete belief."""
    policy = exact_policy(belief, model, x)
    regret = expected_instant_regret(belief, policy, model, x)
    var = posterior_loss_variance(belief, policy, model, x)
    checks: Dict[str, float] = {}
    if model.bernoulli:
        gain = lifted_information_gain(belief, policy, model, x)
        lbar_sum = float(posterior_mean_loss(belief, model, x).sum())
        checks["lemma6"] = float(np.sqrt(2.0 * gain * lbar_sum) - regret)
        checks["lemma1"] = float(2 * model.n_actions * gain - regret * regret)
        checks["pinsker"] = float(gain - 2.0 * var)
    else:
        # Gaussian likelihood: the information gain is replaced by the loss variance
        gain = var
    return RoundDiagnostics(
        expected_regret=regret,
        info_gain=gain,
        lifted_ratio=_ratio(regret, gain),
        decoupling=_ratio(regret, var),
        posterior_variance=var,
        bound_checks=checks,
    )


def gaussian_round_diagnostics(
    belief: GaussianBelief, model: BanditModel, x: int, rng: np.random.Generator, n_draws: int = 10_000
) -> RoundDiagnostics:
    """Diagnostics of a Gaussian-linear round with a Monte Carlo regret numerator.

    ``lifted_ratio`` uses the squared-error surrogate for the information gain.
    ``bound_checks['lemma3']`` is the slack of the conservative ratio (the
    regret estimate lowered by three standard errors) against
    ``min(d, 2 (1 + log K))``.
    """
    phi = model.features[x]
    est, se, policy = gaussian_regret_estimate(belief, phi, rng, n_draws)
    q = gaussian_round_quantities(belief, phi, policy.action_probs)
    k = model.n_actions
    limit = min(float(belief.dim), 2.0 * (1.0 + np.log(k)))
    low = max(0.0, est - 3.0 * se)
    ratio_low = _ratio(low, q.info_gain_surrogate)
    checks = {"lemma3": limit - (ratio_low if ratio_low is not None else 0.0)}
    return RoundDiagnostics(
        expected_regret=est,
        info_gain=q.info_gain_surrogate,
        lifted_ratio=_ratio(est, q.info_gain_surrogate),
        decoupling=_ratio(est, q.info_gain_surrogate),
        posterior_variance=q.info_gain_surrogate,
        bound_checks=checks,
        extras={"regret_se": se, "info_gain_exact": q.info_gain_exact},
    )
