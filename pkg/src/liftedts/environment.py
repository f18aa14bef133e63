"""Context adversaries and the Thompson Sampling interaction loop."""
from __future__ import annotations

import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .agent import ts_act
from .belief import (
    DiscreteBelief,
    GaussianBelief,
    posterior_sample,
    update_discrete,
    update_gaussian,
)
from .infodiag import RoundDiagnostics, gaussian_round_diagnostics, round_diagnostics
from .model import BanditModel, GaussianLinear, GridTables, ParameterGrid, TabularBernoulli

__all__ = [
    "History",
    "ContextAdversary",
    "FixedSequence",
    "IIDUniform",
    "RoundRobin",
    "AdaptiveCallback",
    "Round",
    "RunRecord",
    "draw_loss",
    "run_episode",
    "revealing_instance",
    "REVEAL_ACTION",
]


class History:
    """What the adversary may look at: past contexts, actions and losses.

    There is deliberately no access to the true parameter.
    """

    __slots__ = ("_x", "_a", "_l")

    def __init__(self):
        self._x: List[int] = []
        self._a: List[int] = []
        self._l: List[float] = []

    def _append(self, x: int, a: int, loss: float) -> None:
        self._x.append(x)
        self._a.append(a)
        self._l.append(loss)

    def __len__(self) -> int:
        return len(self._x)

    @property
    def contexts(self) -> Tuple[int, ...]:
        return tuple(self._x)

    @property
    def actions(self) -> Tuple[int, ...]:
        return tuple(self._a)

    @property
    def losses(self) -> Tuple[float, ...]:
        return tuple(self._l)


class ContextAdversary(ABC):
    """Chooses ``X_t`` from the visible history and its own random stream."""

    def __init__(self, n_contexts: int):
        if n_contexts < 1:
            raise ValueError("need at least one context")
        self.n_contexts = int(n_contexts)

    @abstractmethod
    def next_context(self, history: History, rng: np.random.Generator) -> int:
        ...


class FixedSequence(ContextAdversary):
    """Replays a fixed sequence of contexts, cycling if the horizon is longer."""

    def __init__(self, sequence: Sequence[int], n_contexts: Optional[int] = None):
        seq = [int(s) for s in sequence]
        if not seq:
            raise ValueError("context sequence is empty")
        super().__init__(n_contexts if n_contexts is not None else max(seq) + 1)
        if min(seq) < 0 or max(seq) >= self.n_contexts:
            raise ValueError("context sequence has out-of-range entries")
        self.sequence = seq

    def next_context(self, history, rng):
        return self.sequence[len(history) % len(self.sequence)]


class IIDUniform(ContextAdversary):
    """Independent contexts from a fixed distribution (uniform by default)."""

    def __init__(self, n_contexts: int, probs: Optional[Sequence[float]] = None):
        super().__init__(n_contexts)
        if probs is not None:
            probs = np.asarray(probs, dtype=float)
            if probs.shape != (n_contexts,) or np.any(probs < 0) or abs(probs.sum() - 1) > 1e-12:
                raise ValueError("context probabilities must be a distribution over the contexts")
        self.probs = probs

    def next_context(self, history, rng):
        if self.probs is None:
            return int(rng.integers(self.n_contexts))
        return int(rng.choice(self.n_contexts, p=self.probs))


class RoundRobin(ContextAdversary):
    def next_context(self, history, rng):
        return len(history) % self.n_contexts


class AdaptiveCallback(ContextAdversary):
    """Delegates to ``fn(history, rng) -> context``."""

    def __init__(self, fn: Callable[[History, np.random.Generator], int], n_contexts: int):
        super().__init__(n_contexts)
        self.fn = fn

    def next_context(self, history, rng):
        x = int(self.fn(history, rng))
        if not 0 <= x < self.n_contexts:
            raise ValueError(f"adversary returned out-of-range context {x}")
        return x


@dataclass
class Round:
    t: int
    x: int
    a: int
    loss: float
    instant_regret: float
    diagnostics: Optional[RoundDiagnostics] = None
    potential: Optional[float] = None


@dataclass
class RunRecord:
    """Everything one episode produced.

    ``true_atom`` is the atom index for grid priors and ``None`` for Gaussian
    priors; ``true_theta`` is the parameter value in both cases. For Gaussian
    runs each round also records the elliptical potential term
    ``phi^T V^{-1} phi`` of the played feature.
    """

    true_atom: Optional[int]
    true_theta: object
    rounds: List[Round] = field(default_factory=list)
    final_belief: Union[DiscreteBelief, GaussianBelief, None] = None

    @property
    def instant_regrets(self) -> np.ndarray:
        return np.array([r.instant_regret for r in self.rounds])

    @property
    def cumulative_regret(self) -> np.ndarray:
        return np.cumsum(self.instant_regrets)

    @property
    def trajectory(self) -> List[Tuple[int, int, float]]:
        return [(r.x, r.a, r.loss) for r in self.rounds]


def draw_loss(model: BanditModel, mean: float, rng: np.random.Generator) -> float:
    """One loss from ``P_{theta, x, a}`` given its mean."""
    if model.bernoulli:
        return int(rng.random() < mean)
    return float(mean + model.noise_std * rng.standard_normal())


def run_episode(
    prior: Union[ParameterGrid, GaussianBelief],
    model: BanditModel,
    adversary: ContextAdversary,
    horizon: int,
    rng: np.random.Generator,
    diagnostics: bool = False,
    tables: Optional[GridTables] = None,
    diag_draws: int = 10_000,
) -> RunRecord:
    """Sample ``theta*`` from the prior and play ``horizon`` rounds of Thompson Sampling.

    ``rng`` is split into independent streams for the environment, the agent,
    the adversary and the diagnostics, so switching diagnostics on or off does
    not change the trajectory.
    """
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    if adversary.n_contexts > model.n_contexts:
        raise ValueError("adversary emits contexts the model does not define")
    env_rng, agent_rng, adv_rng, diag_rng = rng.spawn(4)
    history = History()

    if isinstance(prior, ParameterGrid):
        belief: Union[DiscreteBelief, GaussianBelief] = DiscreteBelief.from_prior(prior, tables)
        true_atom: Optional[int] = posterior_sample(belief, env_rng)
        true_theta = prior.atoms[true_atom]
    elif isinstance(prior, GaussianBelief):
        if not isinstance(model, GaussianLinear):
            raise ValueError("a Gaussian prior needs a GaussianLinear model")
        belief = prior
        true_atom = None
        true_theta = posterior_sample(prior, env_rng)
    else:
        raise TypeError(f"unsupported prior type {type(prior).__name__}")

    record = RunRecord(true_atom, true_theta)
    for t in range(horizon):
        x = adversary.next_context(history, adv_rng)
        if true_atom is not None:
            true_row = belief.mean_table(model, x)[true_atom]
        else:
            true_row = model.mean_losses(np.atleast_2d(true_theta), x)[0]
        diag = None
        if diagnostics:
            if isinstance(belief, DiscreteBelief):
                diag = round_diagnostics(belief, model, x)
            else:
                diag = gaussian_round_diagnostics(belief, model, x, diag_rng, diag_draws)
        a = ts_act(belief, model, x, agent_rng)
        loss = draw_loss(model, true_row[a], env_rng)
        regret = float(true_row[a] - true_row.min())
        potential = None
        if isinstance(belief, DiscreteBelief):
            belief = update_discrete(belief, model, x, a, loss)
        else:
            phi = model.features[x, a]
            potential = float(belief.potential(phi)[0])
            belief = update_gaussian(belief, phi, loss)
        history._append(x, a, loss)
        record.rounds.append(Round(t + 1, x, a, loss, regret, diag, potential))
    record.final_belief = belief
    return record


REVEAL_ACTION = 0


def revealing_instance(n_actions: int, n_contexts: int = 2):
    """The stylised instance with an action whose loss reveals the optimal action.

    Actions are 0-indexed here; action ``k`` corresponds to label ``k + 1``.
    The reveal action (index 0) has mean loss ``1 - 10**(-label)`` where
    ``label`` is the 1-based optimal action for the context. One atom exists for
    every assignment of optimal actions to contexts. Other actions: the optimal
    one has loss 0 and the rest 0.5; when the reveal action is itself optimal
    every other action has loss 1 so the assignment stays consistent.

    Returns ``(grid, model, adversary)`` with a uniform prior and a round-robin
    adversary.
    """
    if not 2 <= n_actions <= 6:
        raise ValueError("revealing instance supports 2 <= K <= 6")
    if n_contexts < 1:
        raise ValueError("need at least one context")
    assignments = list(itertools.product(range(n_actions), repeat=n_contexts))
    table = np.empty((len(assignments), n_contexts, n_actions))
    for i, opt in enumerate(assignments):
        for x, a_star in enumerate(opt):
            row = np.full(n_actions, 0.5 if a_star != REVEAL_ACTION else 1.0)
            if a_star != REVEAL_ACTION:
                row[a_star] = 0.0
            row[REVEAL_ACTION] = 1.0 - 10.0 ** (-(a_star + 1))
            table[i, x] = row
    grid = ParameterGrid.tabular(len(assignments))
    return grid, TabularBernoulli(table), RoundRobin(n_contexts)
