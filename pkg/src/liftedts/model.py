"""Parameter spaces and likelihood families for contextual bandits with losses.

Four families are supported:

* ``TabularBernoulli``: an explicit table of mean losses indexed by
  (atom, context, action).
* ``LogisticLinear``: Bernoulli losses with mean ``sigmoid(<theta, phi(x, a)>)``.
* ``LogisticGeneral``: Bernoulli losses with mean ``sigmoid(f_theta(x, a))`` for a
  user supplied logit callback with a declared Lipschitz constant.
* ``GaussianLinear``: Gaussian losses with mean ``<theta, phi(x, a)>``.

Contexts and actions are dense integer indices. Parameters are atom indices for
the tabular family and d-vectors for the others.
"""
from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import expit

__all__ = [
    "ParameterGrid",
    "BanditModel",
    "TabularBernoulli",
    "LogisticLinear",
    "LogisticGeneral",
    "GaussianLinear",
    "GridTables",
    "tabulate",
    "log_sigmoid",
    "mean_loss",
    "log_likelihood",
    "audit_lipschitz",
]

_WEIGHT_TOL = 1e-12
_NORM_TOL = 1e-12


def log_sigmoid(z):
    """Numerically stable ``log(1 / (1 + exp(-z)))``.

    Uses ``-log1p(exp(-z))`` for ``z >= 0`` and ``z - log1p(exp(z))`` for ``z < 0``.
    """
    z = np.asarray(z, dtype=float)
    return np.minimum(z, 0.0) - np.log1p(np.exp(-np.abs(z)))


# ---------------------------------------------------------------------------
# Parameter grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ParameterGrid:
    """A finite support for the prior together with its weights.

    ``atoms`` is a 1-d integer array for tabular models (each atom is an opaque
    index) or an ``(N, d)`` float array of parameter vectors.
    """

    atoms: np.ndarray
    prior_weights: np.ndarray
    radius: float = 0.0

    def __post_init__(self):
        atoms = np.array(self.atoms)
        w = np.array(self.prior_weights, dtype=float)
        if atoms.ndim not in (1, 2):
            raise ValueError("atoms must be a 1-d index array or an (N, d) array")
        if w.shape != (atoms.shape[0],):
            raise ValueError(f"expected {atoms.shape[0]} prior weights, got shape {w.shape}")
        if atoms.shape[0] == 0:
            raise ValueError("grid must contain at least one atom")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("prior weights must be finite and nonnegative")
        if abs(w.sum() - 1.0) > _WEIGHT_TOL:
            raise ValueError(f"prior weights sum to {w.sum()!r}, not 1")
        if atoms.ndim == 2:
            atoms = atoms.astype(float)
            norms = np.linalg.norm(atoms, axis=1)
            if np.any(norms > self.radius + _NORM_TOL):
                raise ValueError(
                    f"atom norm {norms.max():.6g} exceeds declared radius {self.radius:.6g}"
                )
            if np.unique(atoms, axis=0).shape[0] != atoms.shape[0]:
                raise ValueError("atoms must be distinct")
        else:
            if np.unique(atoms).shape[0] != atoms.shape[0]:
                raise ValueError("atoms must be distinct")
        atoms.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "prior_weights", w)

    @property
    def size(self) -> int:
        return self.atoms.shape[0]

    @property
    def dim(self) -> int:
        """Parameter dimension; 0 for tabular grids."""
        return 0 if self.atoms.ndim == 1 else self.atoms.shape[1]

    @property
    def is_tabular(self) -> bool:
        return self.atoms.ndim == 1

    def atom(self, i: int):
        """The parameter value of atom ``i`` (an index or a vector)."""
        return self.atoms[i]

    @classmethod
    def tabular(cls, n_atoms: int, weights: Optional[Sequence[float]] = None) -> "ParameterGrid":
        if n_atoms < 1:
            raise ValueError("n_atoms must be positive")
        if weights is None:
            weights = np.full(n_atoms, 1.0 / n_atoms)
        return cls(np.arange(n_atoms), np.asarray(weights, dtype=float))

    @classmethod
    def from_vectors(
        cls,
        atoms,
        weights: Optional[Sequence[float]] = None,
        radius: Optional[float] = None,
    ) -> "ParameterGrid":
        atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
        n = atoms.shape[0]
        if weights is None:
            weights = np.full(n, 1.0 / n)
        if radius is None:
            radius = float(np.linalg.norm(atoms, axis=1).max())
        return cls(atoms, np.asarray(weights, dtype=float), float(radius))

    @classmethod
    def ball_lattice(
        cls,
        dim: int,
        radius: float,
        spacing: float,
        density: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ) -> "ParameterGrid":
        """Cubic lattice with the given spacing intersected with the closed ``radius``-ball.

        Prior weights are proportional to ``density`` evaluated at the lattice
        points (uniform when omitted), renormalised over the grid.
        """
        if dim < 1 or spacing <= 0 or radius < 0:
            raise ValueError("need dim >= 1, spacing > 0 and radius >= 0")
        m = int(np.floor(radius / spacing + 1e-9))
        axis = spacing * np.arange(-m, m + 1)
        mesh = np.stack(np.meshgrid(*([axis] * dim), indexing="ij"), axis=-1).reshape(-1, dim)
        mesh = mesh[np.linalg.norm(mesh, axis=1) <= radius + _NORM_TOL]
        if density is None:
            w = np.ones(mesh.shape[0])
        else:
            w = np.asarray(density(mesh), dtype=float)
        if w.sum() <= 0:
            raise ValueError("density vanishes on every lattice point")
        return cls(mesh, w / w.sum(), float(radius))


# ---------------------------------------------------------------------------
# Likelihood families
# ---------------------------------------------------------------------------


def _check_loss_binary(loss) -> int:
    if loss not in (0, 1):
        raise ValueError(f"Bernoulli loss must be 0 or 1, got {loss!r}")
    return int(loss)


class BanditModel(ABC):
    """A likelihood family ``P_{theta, x, a}`` over a finite context and action set."""

    kind: str = ""
    bernoulli: bool = True

    def __init__(self, n_contexts: int, n_actions: int):
        if n_contexts < 1:
            raise ValueError("need at least one context")
        if n_actions < 1:
            raise ValueError("need at least one action")
        self.n_contexts = int(n_contexts)
        self.n_actions = int(n_actions)

    def check_indices(self, x: int, a: Optional[int] = None) -> None:
        if not 0 <= x < self.n_contexts:
            raise ValueError(f"context index {x} out of range [0, {self.n_contexts})")
        if a is not None and not 0 <= a < self.n_actions:
            raise ValueError(f"action index {a} out of range [0, {self.n_actions})")

    @abstractmethod
    def mean_losses(self, thetas, x: int) -> np.ndarray:
        """Mean losses for a batch of parameters at context ``x``, shape ``(n, K)``."""

    @abstractmethod
    def log_likelihoods(self, thetas, x: int, a: int, loss) -> np.ndarray:
        """``log P_{theta, x, a}(loss)`` for a batch of parameters, shape ``(n,)``."""


class TabularBernoulli(BanditModel):
    """Bernoulli losses with an explicit mean-loss table of shape ``(N, X, K)``."""

    kind = "tabular_bernoulli"

    def __init__(self, table):
        table = np.array(table, dtype=float)
        if table.ndim != 3:
            raise ValueError("table must have shape (atoms, contexts, actions)")
        if np.any(table < 0) or np.any(table > 1) or not np.all(np.isfinite(table)):
            raise ValueError("mean losses must lie in [0, 1]")
        super().__init__(table.shape[1], table.shape[2])
        table.setflags(write=False)
        self.table = table

    @property
    def n_atoms(self) -> int:
        return self.table.shape[0]

    def _rows(self, thetas) -> np.ndarray:
        idx = np.asarray(thetas, dtype=int)
        if np.any(idx < 0) or np.any(idx >= self.n_atoms):
            raise ValueError(f"atom index out of range [0, {self.n_atoms})")
        return idx

    def mean_losses(self, thetas, x):
        self.check_indices(x)
        return self.table[self._rows(thetas), x, :]

    def log_likelihoods(self, thetas, x, a, loss):
        self.check_indices(x, a)
        p = self.table[self._rows(thetas), x, a]
        with np.errstate(divide="ignore"):
            return np.log(p) if _check_loss_binary(loss) == 1 else np.log1p(-p)


class _LinearFeatures:
    """Mixin holding a finite feature map ``phi[x, a] in R^d``."""

    def _set_features(self, features) -> None:
        features = np.array(features, dtype=float)
        if features.ndim != 3:
            raise ValueError("features must have shape (contexts, actions, d)")
        features.setflags(write=False)
        self.features = features
        self.feature_bound = float(np.linalg.norm(features, axis=-1).max())

    @property
    def dim(self) -> int:
        return self.features.shape[2]

    def logits(self, thetas, x: int) -> np.ndarray:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        if thetas.shape[1] != self.dim:
            raise ValueError(f"parameter dimension {thetas.shape[1]} != feature dimension {self.dim}")
        return thetas @ self.features[x].T


class LogisticLinear(_LinearFeatures, BanditModel):
    """Bernoulli losses with mean ``sigmoid(<theta, phi(x, a)>)``.

    The log-likelihood is Lipschitz in theta with constant ``B = max ||phi||``.
    """

    kind = "logistic_linear"

    def __init__(self, features):
        self._set_features(features)
        super().__init__(self.features.shape[0], self.features.shape[1])

    @property
    def lipschitz(self) -> float:
        return self.feature_bound

    def mean_losses(self, thetas, x):
        self.check_indices(x)
        return expit(self.logits(thetas, x))

    def log_likelihoods(self, thetas, x, a, loss):
        self.check_indices(x, a)
        z = self.logits(thetas, x)[:, a]
        return log_sigmoid(z) if _check_loss_binary(loss) == 1 else log_sigmoid(-z)


class LogisticGeneral(BanditModel):
    """Bernoulli losses with mean ``sigmoid(logit_fn(theta, x, a))``.

    ``lipschitz`` is the caller's claim about ``logit_fn`` in theta; use
    :func:`audit_lipschitz` to probe it empirically.
    """

    kind = "logistic_general"

    def __init__(self, logit_fn: Callable, lipschitz: float, n_contexts: int, n_actions: int, dim: int):
        super().__init__(n_contexts, n_actions)
        if lipschitz <= 0:
            raise ValueError("Lipschitz constant must be positive")
        self.logit_fn = logit_fn
        self.lipschitz = float(lipschitz)
        self.dim = int(dim)

    def logits(self, thetas, x: int) -> np.ndarray:
        thetas = np.atleast_2d(np.asarray(thetas, dtype=float))
        out = np.array(
            [[self.logit_fn(th, x, a) for a in range(self.n_actions)] for th in thetas],
            dtype=float,
        )
        if not np.all(np.isfinite(out)):
            raise ValueError("logit function returned a non-finite value")
        return out

    def mean_losses(self, thetas, x):
        self.check_indices(x)
        return expit(self.logits(thetas, x))

    def log_likelihoods(self, thetas, x, a, loss):
        self.check_indices(x, a)
        z = self.logits(thetas, x)[:, a]
        return log_sigmoid(z) if _check_loss_binary(loss) == 1 else log_sigmoid(-z)


class GaussianLinear(_LinearFeatures, BanditModel):
    """Gaussian losses ``N(<theta, phi(x, a)>, noise_std**2)``."""

    kind = "gaussian_linear"
    bernoulli = False

    def __init__(self, features, noise_std: float = 1.0):
        if noise_std <= 0:
            raise ValueError("noise_std must be positive")
        self._set_features(features)
        super().__init__(self.features.shape[0], self.features.shape[1])
        self.noise_std = float(noise_std)

    def mean_losses(self, thetas, x):
        self.check_indices(x)
        return self.logits(thetas, x)

    def log_likelihoods(self, thetas, x, a, loss):
        self.check_indices(x, a)
        if not np.isfinite(loss):
            raise ValueError("Gaussian loss must be finite")
        mu = self.logits(thetas, x)[:, a]
        s = self.noise_std
        return -((loss - mu) ** 2) / (2 * s * s) - np.log(s * np.sqrt(2 * np.pi))


# ---------------------------------------------------------------------------
# Precomputed tables for a model restricted to a grid
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridTables:
    """Mean losses and Bernoulli log-likelihoods of every atom, tabulated once.

    ``means`` has shape ``(X, K, N)``; ``loglik[loss]`` has the same shape.
    Episodes over large grids use these to avoid re-evaluating the model.
    """

    means: np.ndarray
    loglik: Optional[np.ndarray] = field(default=None)


def tabulate(model: BanditModel, grid: ParameterGrid) -> GridTables:
    atoms = grid.atoms
    means = np.stack([model.mean_losses(atoms, x).T for x in range(model.n_contexts)])
    loglik = None
    if model.bernoulli:
        loglik = np.stack(
            [
                np.stack(
                    [
                        np.stack([model.log_likelihoods(atoms, x, a, loss) for a in range(model.n_actions)])
                        for x in range(model.n_contexts)
                    ]
                )
                for loss in (0, 1)
            ]
        )
        loglik.setflags(write=False)
    means.setflags(write=False)
    return GridTables(means, loglik)


# ---------------------------------------------------------------------------
# Scalar operations
# ---------------------------------------------------------------------------


def mean_loss(model: BanditModel, theta, x: int, a: int) -> float:
    """``l(theta, x, a)``: the mean of the loss distribution."""
    model.check_indices(x, a)
    return float(model.mean_losses(np.asarray([theta]), x)[0, a])


def log_likelihood(model: BanditModel, theta, x: int, a: int, loss) -> float:
    """``log P_{theta, x, a}(loss)``; ``-inf`` for an outcome a degenerate mean rules out."""
    return float(model.log_likelihoods(np.asarray([theta]), x, a, loss)[0])


def audit_lipschitz(model: BanditModel, sample_pairs) -> float:
    """Largest observed ``|log P_theta(L) - log P_theta'(L)| / ||theta - theta'||``.

    ``sample_pairs`` is an iterable of ``(theta, theta_prime, x, a)``; the
    maximum runs over the pairs and over both outcomes ``L in {0, 1}``.
    """
    if not model.bernoulli:
        raise ValueError("Lipschitz audit applies to Bernoulli (logistic) models")
    worst = 0.0
    for theta, theta_p, x, a in sample_pairs:
        theta = np.asarray(theta, dtype=float)
        theta_p = np.asarray(theta_p, dtype=float)
        dist = float(np.linalg.norm(theta - theta_p))
        if dist == 0.0:
            raise ValueError("pair contains identical atoms")
        both = np.stack([theta, theta_p])
        for loss in (0, 1):
            ll = model.log_likelihoods(both, x, a, loss)
            worst = max(worst, abs(ll[0] - ll[1]) / dist)
    return worst
