"""Thompson Sampling and its exact action distribution.

Ties in every argmin are broken towards the lowest action index, identically in
:func:`ts_act`, :func:`exact_policy` and :func:`optimal_action`.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .belief import DiscreteBelief, GaussianBelief, posterior_sample
from .model import BanditModel

__all__ = ["PolicySnapshot", "ts_act", "exact_policy", "monte_carlo_policy", "optimal_action"]


@dataclass(frozen=True)
class PolicySnapshot:
    """Action distribution ``pi_t(. | x)``; ``approximate`` marks Monte Carlo estimates."""

    action_probs: np.ndarray
    approximate: bool = False

    def __post_init__(self):
        p = np.asarray(self.action_probs, dtype=float)
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-10:
            raise ValueError("action probabilities must be a distribution")
        object.__setattr__(self, "action_probs", p)

    @property
    def n_actions(self) -> int:
        return self.action_probs.shape[0]


def optimal_action(model: BanditModel, theta, x: int) -> int:
    """``argmin_a l(theta, x, a)`` with ties to the lowest index."""
    return int(np.argmin(model.mean_losses(np.asarray([theta]), x)[0]))


def ts_act(
    belief: Union[DiscreteBelief, GaussianBelief],
    model: BanditModel,
    x: int,
    rng: np.random.Generator,
    size: Optional[int] = None,
):
    """Sample a parameter from the posterior and play its optimal action.

    With ``size`` set, returns an array of independent draws that consumes
    ``rng`` exactly like ``size`` sequential calls.
    """
    model.check_indices(x)
    draws = posterior_sample(belief, rng, size)
    if isinstance(belief, DiscreteBelief):
        rows = belief.mean_table(model, x)[np.atleast_1d(draws)]
    else:
        rows = model.mean_losses(np.atleast_2d(draws), x)
    actions = np.argmin(rows, axis=1)
    return int(actions[0]) if size is None else actions


def exact_policy(belief: DiscreteBelief, model: BanditModel, x: int) -> PolicySnapshot:
    """Posterior probability that each action is optimal at context ``x``."""
    if not isinstance(belief, DiscreteBelief):
        raise TypeError("exact_policy needs a discrete belief; use monte_carlo_policy for Gaussian beliefs")
    best = np.argmin(belief.mean_table(model, x), axis=1)
    probs = np.bincount(best, weights=belief.weights, minlength=model.n_actions)
    return PolicySnapshot(probs / probs.sum())


def monte_carlo_policy(
    belief: GaussianBelief, model: BanditModel, x: int, rng: np.random.Generator, n_draws: int
) -> PolicySnapshot:
    """Approximate action distribution from ``n_draws`` posterior samples."""
    actions = ts_act(belief, model, x, rng, size=n_draws)
    counts = np.bincount(actions, minlength=model.n_actions)
    return PolicySnapshot(counts / n_draws, approximate=True)
