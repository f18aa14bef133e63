"""Experiment configuration: JSON in, validated instance out.

Schema (all keys lowercase)::

    {
      "model": {"kind": "tabular_bernoulli", "n_atoms": 16, "n_contexts": 4, "n_actions": 2,
                "instance_seed": 7}                    # or "table": [[[...]]] (atoms x contexts x actions)
             | {"kind": "logistic_linear", "dim": 2, "n_contexts": 4, "n_actions": 3,
                "feature_bound": 1.0, "instance_seed": 7}   # or "features": [[[...]]]
             | {"kind": "gaussian_linear", ..., "noise_std": 1.0}
             | {"kind": "revealing", "n_actions": 2, "n_contexts": 2},
      "prior": {"kind": "uniform"}                                  # tabular models
             | {"kind": "weights", "weights": [...]}
             | {"kind": "ball_lattice", "radius": 1.0, "spacing": "auto" | 0.01}
             | {"kind": "atoms", "atoms": [[...]], "weights": [...]}
             | {"kind": "gaussian", "scale": 1.0},
      "adversary": {"kind": "iid_uniform" | "round_robin"}
                 | {"kind": "fixed_sequence", "sequence": [...]},
      "horizon": 200, "runs": 100, "master_seed": 1,
      "diagnostics": false, "diag_draws": 10000,
      "output": {"rounds_csv": "rounds.csv", "report_json": "report.json"}
    }

``"spacing": "auto"`` picks ``1 / (C T)`` with ``C`` the feature bound.
"""
from __future__ import annotations

import copy
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np

from ..belief import GaussianBelief
from ..environment import (
    ContextAdversary,
    FixedSequence,
    IIDUniform,
    RoundRobin,
    revealing_instance,
)
from ..model import (
    BanditModel,
    GaussianLinear,
    GridTables,
    LogisticLinear,
    ParameterGrid,
    TabularBernoulli,
    tabulate,
)

__all__ = ["ConfigError", "ExperimentConfig", "Instance", "load_config", "parse_config", "build_instance", "random_features"]

# grids up to this many (atom, context, action) cells get precomputed tables
_TABULATE_LIMIT = 5_000_000


class ConfigError(ValueError):
    """A configuration problem, anchored to a line of the source file when known."""

    def __init__(self, message: str, line: Optional[int] = None, source: str = "<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


@dataclass
class ExperimentConfig:
    model: Dict[str, Any]
    prior: Dict[str, Any]
    adversary: Dict[str, Any]
    horizon: int
    runs: int
    master_seed: int
    diagnostics: bool = False
    diag_draws: int = 10_000
    output: Dict[str, str] = field(default_factory=dict)
    raw: Dict[str, Any] = field(default_factory=dict, repr=False)
    instance: Optional["Instance"] = field(default=None, repr=False, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self.raw)

    def get_instance(self) -> "Instance":
        if self.instance is None:
            self.instance = build_instance(self)
        return self.instance

    @property
    def rounds_csv(self) -> str:
        return self.output.get("rounds_csv", "rounds.csv")

    @property
    def report_json(self) -> str:
        return self.output.get("report_json", "report.json")


def _locate(text: str, path: List[str]) -> Optional[int]:
    """Best-effort line number of the last key in ``path``."""
    pos = 0
    for key in path:
        m = re.compile(r'"%s"\s*:' % re.escape(key)).search(text, pos)
        if m is None:
            break
        pos = m.start()
    return text.count("\n", 0, pos) + 1 if text else None


def _require(cond: bool, msg: str, text: str, path: List[str], source: str) -> None:
    if not cond:
        raise ConfigError(msg, _locate(text, path), source)


def parse_config(data: Dict[str, Any], text: str = "", source: str = "<config>") -> ExperimentConfig:
    req = lambda cond, msg, *path: _require(cond, msg, text, list(path), source)  # noqa: E731
    req(isinstance(data, dict), "top level must be a JSON object")
    for key in ("model", "horizon", "runs", "master_seed"):
        req(key in data, f"missing required key '{key}'", key)
    model = data["model"]
    req(isinstance(model, dict) and "kind" in model, "model must be an object with a 'kind'", "model")
    kind = model["kind"]
    req(
        kind in ("tabular_bernoulli", "logistic_linear", "gaussian_linear", "revealing"),
        f"unknown model kind {kind!r}",
        "model",
        "kind",
    )
    horizon, runs, seed = data["horizon"], data["runs"], data["master_seed"]
    req(isinstance(horizon, int) and horizon >= 1, "horizon must be an integer >= 1", "horizon")
    req(isinstance(runs, int) and runs >= 1, "runs must be an integer >= 1", "runs")
    req(isinstance(seed, int) and 0 <= seed < 2**64, "master_seed must be a 64-bit unsigned integer", "master_seed")
    default_prior = {"kind": "gaussian", "scale": 1.0} if kind == "gaussian_linear" else {"kind": "uniform"}
    prior = data.get("prior", default_prior)
    req(isinstance(prior, dict) and "kind" in prior, "prior must be an object with a 'kind'", "prior")
    adversary = data.get("adversary", {"kind": "iid_uniform"})
    req(isinstance(adversary, dict) and "kind" in adversary, "adversary must be an object with a 'kind'", "adversary")
    output = data.get("output", {})
    req(isinstance(output, dict), "output must be an object", "output")
    cfg = ExperimentConfig(
        model=model,
        prior=prior,
        adversary=adversary,
        horizon=horizon,
        runs=runs,
        master_seed=seed,
        diagnostics=bool(data.get("diagnostics", False)),
        diag_draws=int(data.get("diag_draws", 10_000)),
        output=output,
        raw=copy.deepcopy(data),
    )
    # building the instance validates dimensions before any run starts
    try:
        cfg.instance = build_instance(cfg)
    except (ValueError, KeyError, TypeError) as exc:
        section = _guess_section(str(exc))
        raise ConfigError(f"invalid configuration: {exc}", _locate(text, [section]), source) from exc
    return cfg


def _guess_section(msg: str) -> str:
    for key in ("prior", "adversary", "model"):
        if key in msg:
            return key
    return "model"


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", None, str(path)) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON parse error: {exc.msg} (column {exc.colno})", exc.lineno, str(path)) from exc
    return parse_config(data, text, str(path))


# ---------------------------------------------------------------------------
# Instance construction
# ---------------------------------------------------------------------------


@dataclass
class Instance:
    prior: Union[ParameterGrid, GaussianBelief]
    model: BanditModel
    adversary: ContextAdversary
    tables: Optional[GridTables] = None
    lipschitz: Optional[float] = None


def random_features(rng: np.random.Generator, n_contexts: int, n_actions: int, dim: int, bound: float) -> np.ndarray:
    """Feature vectors drawn uniformly on the sphere of radius ``bound``."""
    phi = rng.standard_normal((n_contexts, n_actions, dim))
    phi /= np.linalg.norm(phi, axis=-1, keepdims=True)
    return bound * phi


def _build_model(spec: Dict[str, Any]) -> BanditModel:
    kind = spec["kind"]
    rng = np.random.default_rng(int(spec.get("instance_seed", 0)))
    if kind == "tabular_bernoulli":
        if "table" in spec:
            return TabularBernoulli(spec["table"])
        shape = (int(spec["n_atoms"]), int(spec["n_contexts"]), int(spec["n_actions"]))
        return TabularBernoulli(rng.random(shape))
    if "features" in spec:
        features = np.asarray(spec["features"], dtype=float)
    else:
        features = random_features(
            rng,
            int(spec["n_contexts"]),
            int(spec["n_actions"]),
            int(spec["dim"]),
            float(spec.get("feature_bound", 1.0)),
        )
    if kind == "logistic_linear":
        return LogisticLinear(features)
    return GaussianLinear(features, float(spec.get("noise_std", 1.0)))


def _build_prior(spec: Dict[str, Any], model: BanditModel, horizon: int):
    kind = spec["kind"]
    if isinstance(model, TabularBernoulli):
        n = model.n_atoms
        if kind == "uniform":
            return ParameterGrid.tabular(n)
        if kind == "weights":
            w = np.asarray(spec["weights"], dtype=float)
            if w.shape != (n,):
                raise ValueError(f"prior weights must have length {n} (one per table atom)")
            return ParameterGrid.tabular(n, w)
        raise ValueError(f"prior kind {kind!r} does not apply to tabular models")
    if isinstance(model, GaussianLinear) and kind == "gaussian":
        return GaussianBelief.prior(model.dim, float(spec.get("scale", 1.0)), model.noise_std**2)
    if kind == "ball_lattice":
        radius = float(spec.get("radius", 1.0))
        spacing = spec.get("spacing", "auto")
        if spacing == "auto":
            spacing = 1.0 / (model.feature_bound * horizon)
        return ParameterGrid.ball_lattice(model.dim, radius, float(spacing))
    if kind == "atoms":
        atoms = np.asarray(spec["atoms"], dtype=float)
        if atoms.ndim != 2 or atoms.shape[1] != model.dim:
            raise ValueError(f"prior atoms must be vectors of dimension {model.dim}")
        return ParameterGrid.from_vectors(atoms, spec.get("weights"), spec.get("radius"))
    raise ValueError(f"prior kind {kind!r} does not apply to {model.kind} models")


def _build_adversary(spec: Dict[str, Any], n_contexts: int) -> ContextAdversary:
    kind = spec["kind"]
    if kind == "iid_uniform":
        return IIDUniform(n_contexts)
    if kind == "round_robin":
        return RoundRobin(n_contexts)
    if kind == "fixed_sequence":
        return FixedSequence(spec["sequence"], n_contexts)
    raise ValueError(f"unknown adversary kind {kind!r}")


def build_instance(cfg: ExperimentConfig) -> Instance:
    spec = cfg.model
    if spec["kind"] == "revealing":
        grid, model, _ = revealing_instance(int(spec["n_actions"]), int(spec.get("n_contexts", 2)))
        prior: Union[ParameterGrid, GaussianBelief] = grid
    else:
        model = _build_model(spec)
        prior = _build_prior(cfg.prior, model, cfg.horizon)
    adversary = _build_adversary(cfg.adversary, model.n_contexts)
    tables = None
    if isinstance(prior, ParameterGrid) and prior.size * model.n_contexts * model.n_actions <= _TABULATE_LIMIT:
        tables = tabulate(model, prior)
    lipschitz = getattr(model, "lipschitz", None)
    return Instance(prior, model, adversary, tables, lipschitz)
