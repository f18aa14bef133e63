"""Exact posterior maintenance.

Discrete posteriors live in log space over the atoms of a :class:`ParameterGrid`;
the Gaussian-conjugate posterior is kept in precision form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Tuple, Union

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import entr, logsumexp

from .model import BanditModel, GridTables, ParameterGrid

__all__ = [
    "InconsistentEvidenceError",
    "DiscreteBelief",
    "GaussianBelief",
    "update_discrete",
    "update_gaussian",
    "entropy",
    "entropy_of",
    "telescoping_check",
    "posterior_sample",
    "belief_snapshot",
]


class InconsistentEvidenceError(ValueError):
    """Raised when an observation has zero likelihood under every atom."""


@dataclass(frozen=True, eq=False)
class DiscreteBelief:
    """Posterior weights over the atoms of ``grid``.

    ``log_weights`` are unnormalised; atoms ruled out by a degenerate likelihood
    keep their slot with weight ``-inf``. ``tables`` optionally caches the model
    evaluated on the grid (see :func:`liftedts.model.tabulate`).
    """

    grid: ParameterGrid
    log_weights: np.ndarray
    t: int = 0
    tables: Optional[GridTables] = field(default=None, repr=False)

    @classmethod
    def from_prior(cls, grid: ParameterGrid, tables: Optional[GridTables] = None) -> "DiscreteBelief":
        with np.errstate(divide="ignore"):
            lw = np.log(grid.prior_weights)
        return cls(grid, lw, 0, tables)

    @cached_property
    def weights(self) -> np.ndarray:
        lw = self.log_weights
        w = np.exp(lw - lw.max())
        w /= w.sum()
        w.setflags(write=False)
        return w

    @cached_property
    def cdf(self) -> np.ndarray:
        return np.cumsum(self.weights)

    def mean_table(self, model: BanditModel, x: int) -> np.ndarray:
        """Mean losses of every atom at context ``x``, shape ``(N, K)``."""
        if self.tables is not None:
            model.check_indices(x)
            return self.tables.means[x].T
        return model.mean_losses(self.grid.atoms, x)

    def atom_log_likelihoods(self, model: BanditModel, x: int, a: int, loss) -> np.ndarray:
        if self.tables is not None and self.tables.loglik is not None:
            model.check_indices(x, a)
            if loss not in (0, 1):
                raise ValueError(f"Bernoulli loss must be 0 or 1, got {loss!r}")
            return self.tables.loglik[int(loss), x, a]
        return model.log_likelihoods(self.grid.atoms, x, a, loss)


@dataclass(frozen=True, eq=False)
class GaussianBelief:
    """Posterior ``N(mean, covariance)`` for a Gaussian prior ``N(0, prior_scale * I)``.

    Stored as the regularised Gram matrix ``V = sum phi phi^T + (noise_var / prior_scale) I``
    and the moment vector ``b = sum phi L``, so that ``mean = V^{-1} b`` and
    ``covariance = noise_var * V^{-1}``.
    """

    gram: np.ndarray
    moment: np.ndarray
    prior_scale: float
    noise_var: float
    t: int = 0

    @classmethod
    def prior(cls, dim: int, prior_scale: float = 1.0, noise_var: float = 1.0) -> "GaussianBelief":
        if dim < 1 or prior_scale <= 0 or noise_var <= 0:
            raise ValueError("need dim >= 1 and positive prior_scale, noise_var")
        return cls(np.eye(dim) * (noise_var / prior_scale), np.zeros(dim), float(prior_scale), float(noise_var))

    @property
    def dim(self) -> int:
        return self.moment.shape[0]

    @cached_property
    def _chol(self):
        # raises LinAlgError when V is not positive-definite
        return cho_factor(self.gram, lower=True)

    @cached_property
    def mean(self) -> np.ndarray:
        return cho_solve(self._chol, self.moment)

    @cached_property
    def covariance(self) -> np.ndarray:
        cov = self.noise_var * cho_solve(self._chol, np.eye(self.dim))
        return 0.5 * (cov + cov.T)

    @cached_property
    def covariance_cholesky(self) -> np.ndarray:
        return np.linalg.cholesky(self.covariance)

    def potential(self, features) -> np.ndarray:
        """``phi^T V^{-1} phi`` for each row of ``features``."""
        phi = np.atleast_2d(features)
        return np.einsum("ij,ji->i", phi, cho_solve(self._chol, phi.T))

    def predictive_variance(self, features) -> np.ndarray:
        """Posterior variance of ``<theta, phi>`` for each row of ``features``."""
        return self.noise_var * self.potential(features)


def update_discrete(belief: DiscreteBelief, model: BanditModel, x: int, a: int, loss) -> DiscreteBelief:
    """Bayes' rule on the atoms: add ``log P_{theta, x, a}(loss)`` to every log-weight."""
    lw = belief.log_weights + belief.atom_log_likelihoods(model, x, a, loss)
    top = lw.max()
    if not np.isfinite(top):
        raise InconsistentEvidenceError(
            f"loss {loss!r} at (x={x}, a={a}) has zero likelihood under every atom"
        )
    return DiscreteBelief(belief.grid, lw - top, belief.t + 1, belief.tables)


def update_gaussian(belief: GaussianBelief, feature, loss: float) -> GaussianBelief:
    """Conjugate update with one observation ``loss ~ N(<theta, feature>, noise_var)``."""
    if not np.isfinite(loss):
        raise ValueError(f"loss must be finite, got {loss!r}")
    phi = np.asarray(feature, dtype=float)
    if phi.shape != (belief.dim,):
        raise ValueError(f"feature shape {phi.shape} does not match dimension {belief.dim}")
    return GaussianBelief(
        belief.gram + np.outer(phi, phi),
        belief.moment + phi * loss,
        belief.prior_scale,
        belief.noise_var,
        belief.t + 1,
    )


def entropy_of(weights) -> float:
    """Shannon entropy in nats with ``0 log 0 = 0``."""
    return float(entr(np.asarray(weights, dtype=float)).sum())


def entropy(grid: ParameterGrid) -> float:
    """Entropy of the prior carried by ``grid``."""
    return entropy_of(grid.prior_weights)


def telescoping_check(
    grid: ParameterGrid,
    model: BanditModel,
    true_atom: int,
    trajectory: Iterable[Tuple[int, int, float]],
    tables: Optional[GridTables] = None,
) -> Tuple[float, float]:
    """Both sides of the Bayesian telescoping identity for one trajectory.

    ``lhs`` sums ``log p_{theta*}(L_t) / pbar_t(L_t)`` with the posterior
    predictive ``pbar_t`` evaluated under a sequentially updated posterior.
    ``rhs`` is the single log-ratio of the true atom's likelihood against the
    prior-mixture evidence of the whole trajectory.
    """
    belief = DiscreteBelief.from_prior(grid, tables)
    log_prior = belief.log_weights.copy()
    total_ll = np.zeros(grid.size)
    lhs = 0.0
    for x, a, loss in trajectory:
        ll = belief.atom_log_likelihoods(model, x, a, loss)
        log_q = belief.log_weights - logsumexp(belief.log_weights)
        log_pred = logsumexp(log_q + ll)
        lhs += ll[true_atom] - log_pred
        total_ll = total_ll + ll
        belief = update_discrete(belief, model, x, a, loss)
    evidence = logsumexp(log_prior + total_ll)
    if not np.isfinite(evidence):
        raise InconsistentEvidenceError("trajectory has zero evidence under the prior")
    rhs = total_ll[true_atom] - evidence
    return float(lhs), float(rhs)


def posterior_sample(
    belief: Union[DiscreteBelief, GaussianBelief],
    rng: np.random.Generator,
    size: Optional[int] = None,
):
    """Draw from the posterior.

    Discrete beliefs return atom indices (use ``belief.grid.atoms`` for the
    parameter value); Gaussian beliefs return parameter vectors. ``size=None``
    draws a single value; batched draws consume the stream exactly as repeated
    single draws would.
    """
    if isinstance(belief, DiscreteBelief):
        cdf = belief.cdf
        u = rng.random(size)
        idx = np.searchsorted(cdf, u * cdf[-1], side="right")
        idx = np.minimum(idx, belief.grid.size - 1)
        return int(idx) if size is None else idx
    z = rng.standard_normal(belief.dim if size is None else (size, belief.dim))
    return belief.mean + z @ belief.covariance_cholesky.T


def belief_snapshot(belief: Union[DiscreteBelief, GaussianBelief]) -> dict:
    """JSON-ready snapshot of a belief."""
    if isinstance(belief, DiscreteBelief):
        return {"type": "discrete", "t": belief.t, "weights": belief.weights.tolist()}
    return {
        "type": "gaussian",
        "t": belief.t,
        "mean": belief.mean.tolist(),
        "covariance": belief.covariance.tolist(),
    }
