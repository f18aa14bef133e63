"""Covers of parameter sets and closed-form regret bounds.

All logarithms are natural.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .belief import telescoping_check
from .model import BanditModel, GridTables, ParameterGrid

__all__ = [
    "CoverPartition",
    "build_cover",
    "ball_cover_bound",
    "cover_information_bound",
    "bound_theorem1",
    "bound_theorem2",
    "bound_theorem2_min",
    "bound_theorem3",
    "bound_theorem4",
    "bound_gaussian",
    "elliptical_potential_bound",
]


@dataclass(frozen=True, eq=False)
class CoverPartition:
    """An epsilon-cover of a finite atom set and the induced nearest-center partition.

    ``centers`` are indices into the atom array; ``assignment[i]`` is the
    position (in ``centers``) of the center owning atom ``i``.
    """

    points: np.ndarray
    centers: np.ndarray
    assignment: np.ndarray
    epsilon: float

    @property
    def n_cells(self) -> int:
        return self.centers.shape[0]

    def center_points(self) -> np.ndarray:
        return self.points[self.centers]

    def cell_of(self, atom: int) -> np.ndarray:
        """Atom indices sharing a cell with ``atom``."""
        return np.flatnonzero(self.assignment == self.assignment[atom])

    def cell_masses(self, weights) -> np.ndarray:
        return np.bincount(self.assignment, weights=np.asarray(weights, dtype=float), minlength=self.n_cells)


def build_cover(
    grid: ParameterGrid,
    epsilon: float,
    metric: Optional[Callable[[np.ndarray, np.ndarray], float]] = None,
) -> CoverPartition:
    """Greedy epsilon-cover of the grid atoms followed by a nearest-center partition.

    Atoms are scanned in order; each atom not yet within ``epsilon`` of a
    center becomes a center. Centers are therefore more than ``epsilon`` apart,
    which keeps their number under the packing bound of the enclosing ball.
    ``metric`` defaults to the Euclidean distance (served by a k-d tree); a
    custom metric falls back to pairwise evaluation.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    if grid.is_tabular:
        raise ValueError("covers need vector-valued atoms")
    pts = grid.atoms
    n = pts.shape[0]
    covered = np.zeros(n, dtype=bool)
    centers = []
    if metric is None:
        tree = cKDTree(pts)
        for i in range(n):
            if covered[i]:
                continue
            centers.append(i)
            covered[tree.query_ball_point(pts[i], epsilon)] = True
        centers = np.asarray(centers)
        _, assignment = cKDTree(pts[centers]).query(pts)
    else:
        dist = np.array([[metric(p, q) for q in pts] for p in pts])
        for i in range(n):
            if covered[i]:
                continue
            centers.append(i)
            covered |= dist[i] <= epsilon
        centers = np.asarray(centers)
        assignment = np.argmin(dist[:, centers], axis=1)
    return CoverPartition(pts, centers, np.asarray(assignment), float(epsilon))


def ball_cover_bound(radius: float, dim: int, epsilon: float) -> float:
    """``(2 S / epsilon + 1)^d``, the covering-number bound for the S-ball."""
    if radius < 0 or dim < 1 or epsilon <= 0:
        raise ValueError("need radius >= 0, dim >= 1 and epsilon > 0")
    return (2.0 * radius / epsilon + 1.0) ** dim


def cover_information_bound(
    grid: ParameterGrid,
    model: BanditModel,
    true_atom: int,
    trajectory: Sequence[Tuple[int, int, float]],
    cover: CoverPartition,
    lipschitz: float,
    tables: Optional[GridTables] = None,
    log_evidence_ratio: Optional[float] = None,
) -> Tuple[float, float]:
    """Per-trajectory covering bound on the accumulated information.

    ``lhs = log prod_t p_{theta*}(L_t) / sum_theta Q_1(theta) prod_t p_theta(L_t)``;
    ``rhs = -log Q_1(cell of theta*) + 2 C epsilon T``. Pass
    ``log_evidence_ratio`` when ``lhs`` is already known (for example from the
    final posterior of the run) to skip recomputing it.
    """
    if not 0 <= true_atom < grid.size:
        raise ValueError("true atom is not in the grid")
    if cover.points.shape != grid.atoms.shape:
        raise ValueError("cover was built on a different atom set")
    if log_evidence_ratio is None:
        _, log_evidence_ratio = telescoping_check(grid, model, true_atom, trajectory, tables)
    cell_mass = cover.cell_masses(grid.prior_weights)[cover.assignment[true_atom]]
    rhs = -math.log(cell_mass) + 2.0 * lipschitz * cover.epsilon * len(trajectory)
    return float(log_evidence_ratio), float(rhs)


# ---------------------------------------------------------------------------
# Regret bounds
# ---------------------------------------------------------------------------


def bound_theorem1(rho: float, horizon: float, entropy: float) -> float:
    """``sqrt(rho T H)``."""
    return math.sqrt(rho * horizon * entropy)


def bound_theorem2(rho: float, horizon: float, cover_log: float, epsilon: float, lipschitz: float) -> float:
    """``sqrt(rho T (log N_eps + 2 eps C T))`` at a single epsilon."""
    return math.sqrt(rho * horizon * (cover_log + 2.0 * epsilon * lipschitz * horizon))


def bound_theorem2_min(rho: float, horizon: float, cover_logs: Iterable[Tuple[float, float]], lipschitz: float) -> float:
    """Minimum of :func:`bound_theorem2` over ``(epsilon, log N_eps)`` pairs."""
    return min(bound_theorem2(rho, horizon, c, eps, lipschitz) for eps, c in cover_logs)


def bound_theorem3(n_actions: int, horizon: float, n_atoms: int) -> float:
    """``sqrt(2 K T log N)`` for a finite prior support."""
    return math.sqrt(2.0 * n_actions * horizon * math.log(n_atoms))


def bound_theorem4(n_actions: int, horizon: float, dim: int, radius: float, lipschitz: float) -> float:
    """``sqrt(2 K T (d log(2 S C T + 1) + 1))`` for logistic bandits, constant as printed."""
    return math.sqrt(2.0 * n_actions * horizon * (dim * math.log(2.0 * radius * lipschitz * horizon + 1.0) + 1.0))


def bound_gaussian(dim: int, horizon: float, n_actions: int, prior_scale: float, feature_bound: float, noise_std: float) -> float:
    """``sqrt(2 d T min{2(1 + log K), d} log(1 + T lambda B^2 / (d sigma^2)))``."""
    rho = min(2.0 * (1.0 + math.log(n_actions)), float(dim))
    return math.sqrt(2.0 * dim * horizon * rho * math.log1p(horizon * prior_scale * feature_bound**2 / (dim * noise_std**2)))


def elliptical_potential_bound(dim: int, horizon: float, prior_scale: float, feature_bound: float, noise_std: float) -> float:
    """``2 d log(1 + T lambda B^2 / (d sigma^2))``."""
    return 2.0 * dim * math.log1p(horizon * prior_scale * feature_bound**2 / (dim * noise_std**2))
