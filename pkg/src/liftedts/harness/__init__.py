"""Configuration, Monte Carlo orchestration, verification suites and the CLI."""
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .runner import aggregate, run_experiment
from .seeding import derive_run_seed, run_rng
from .verify import SUITES, CheckResult, run_suite

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "parse_config",
    "aggregate",
    "run_experiment",
    "derive_run_seed",
    "run_rng",
    "SUITES",
    "CheckResult",
    "run_suite",
]
