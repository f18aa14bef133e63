"""Thompson Sampling for Bayesian contextual bandits with exact posteriors and
per-round information-ratio diagnostics."""
from .agent import PolicySnapshot, exact_policy, monte_carlo_policy, optimal_action, ts_act
from .belief import (
    DiscreteBelief,
    GaussianBelief,
    InconsistentEvidenceError,
    entropy,
    posterior_sample,
    telescoping_check,
    update_discrete,
    update_gaussian,
)
from .environment import FixedSequence, IIDUniform, RoundRobin, run_episode, revealing_instance
from .geometry import (
    ball_cover_bound,
    bound_gaussian,
    bound_theorem1,
    bound_theorem2,
    bound_theorem3,
    bound_theorem4,
    build_cover,
    cover_information_bound,
    elliptical_potential_bound,
)
from .infodiag import (
    conjugate_g,
    decoupling_coefficient,
    expected_instant_regret,
    lifted_information_gain,
    lifted_information_ratio,
    round_diagnostics,
)
from .model import GaussianLinear, LogisticGeneral, LogisticLinear, ParameterGrid, TabularBernoulli, tabulate

__version__ = "0.1.0"

__all__ = [
    "PolicySnapshot",
    "exact_policy",
    "monte_carlo_policy",
    "optimal_action",
    "ts_act",
    "DiscreteBelief",
    "GaussianBelief",
    "InconsistentEvidenceError",
    "entropy",
    "posterior_sample",
    "telescoping_check",
    "update_discrete",
    "update_gaussian",
    "FixedSequence",
    "IIDUniform",
    "RoundRobin",
    "run_episode",
    "revealing_instance",
    "ball_cover_bound",
    "bound_gaussian",
    "bound_theorem1",
    "bound_theorem2",
    "bound_theorem3",
    "bound_theorem4",
    "build_cover",
    "cover_information_bound",
    "elliptical_potential_bound",
    "conjugate_g",
    "decoupling_coefficient",
    "expected_instant_regret",
    "lifted_information_gain",
    "lifted_information_ratio",
    "round_diagnostics",
    "GaussianLinear",
    "LogisticGeneral",
    "LogisticLinear",
    "ParameterGrid",
    "TabularBernoulli",
    "tabulate",
]
