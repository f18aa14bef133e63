"""Monte Carlo orchestration for ``run`` and ``sweep``.

Runs are independent episodes with their own RNG stream (see
:mod:`liftedts.harness.seeding`); results are merged in run-index order, so the
outputs do not depend on the number of workers.

``rounds.csv`` columns::

    run, t, x, a, loss, instant_regret, cum_regret, info_gain, rho_t, delta_t

``info_gain`` is the lifted information gain (the squared-error surrogate for
Gaussian runs), ``rho_t`` the lifted information ratio and ``delta_t`` the
decoupling coefficient, all evaluated on the pre-update belief. Diagnostic
cells are empty when diagnostics are off or the ratio is undefined (0/0).
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from scipy.special import logsumexp

from ..belief import DiscreteBelief, InconsistentEvidenceError, entropy
from ..environment import run_episode
from ..geometry import (
    bound_gaussian,
    bound_theorem1,
    bound_theorem3,
    bound_theorem4,
    elliptical_potential_bound,
)
from ..model import GaussianLinear, LogisticLinear, ParameterGrid, TabularBernoulli
from .config import ExperimentConfig, parse_config
from .seeding import run_rng

__all__ = ["RunResult", "run_experiment", "aggregate", "write_rounds_csv", "fmt", "worker_count", "write_report", "WORKERS_ENV"]

logger = logging.getLogger(__name__)

WORKERS_ENV = "LIFTEDTS_WORKERS"
CSV_COLUMNS = ["run", "t", "x", "a", "loss", "instant_regret", "cum_regret", "info_gain", "rho_t", "delta_t"]


def fmt(value: Optional[float]) -> str:
    """12 significant digits; empty string for missing values."""
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12g}"


def _round12(value):
    if isinstance(value, float):
        return float(f"{value:.12g}") if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: _round12(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_round12(v) for v in value]
    return value


def worker_count() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


@dataclass
class RunResult:
    run: int
    rows: List[tuple] = field(default_factory=list)
    cum_regret: Optional[np.ndarray] = None
    error: Optional[str] = None
    extras: Dict[str, float] = field(default_factory=dict)


def _execute_run(cfg: ExperimentConfig, run: int) -> RunResult:
    inst = cfg.get_instance()
    try:
        record = run_episode(
            inst.prior,
            inst.model,
            inst.adversary,
            cfg.horizon,
            run_rng(cfg.master_seed, run),
            diagnostics=cfg.diagnostics,
            tables=inst.tables,
            diag_draws=cfg.diag_draws,
        )
    except (InconsistentEvidenceError, np.linalg.LinAlgError, FloatingPointError) as exc:
        logger.warning("run %d aborted: %s", run, exc)
        return RunResult(run, error=f"{type(exc).__name__}: {exc}")
    cum = record.cumulative_regret
    rows = []
    max_rho = None
    violations = 0
    for r, c in zip(record.rounds, cum):
        d = r.diagnostics
        if d is not None:
            if d.lifted_ratio is not None:
                max_rho = d.lifted_ratio if max_rho is None else max(max_rho, d.lifted_ratio)
            violations += sum(1 for name, s in d.bound_checks.items() if name != "lemma1" and s < -1e-10)
        rows.append(
            (
                run,
                r.t,
                r.x,
                r.a,
                r.loss,
                r.instant_regret,
                float(c),
                None if d is None else d.info_gain,
                None if d is None else d.lifted_ratio,
                None if d is None else d.decoupling,
            )
        )
    extras: Dict[str, float] = {}
    if max_rho is not None:
        extras["max_rho"] = max_rho
    if cfg.diagnostics:
        extras["bound_violations"] = float(violations)
    if isinstance(record.final_belief, DiscreteBelief):
        lw = record.final_belief.log_weights
        i = record.true_atom
        extras["information_sum"] = float(lw[i] - logsumexp(lw) - math.log(inst.prior.prior_weights[i]))
    else:
        extras["potential_sum"] = float(sum(r.potential for r in record.rounds))
    return RunResult(run, rows, cum, None, extras)


_WORKER_CFG: Optional[ExperimentConfig] = None


def _init_worker(raw: Dict[str, Any]) -> None:
    global _WORKER_CFG
    _WORKER_CFG = parse_config(raw)


def _worker_run(run: int) -> RunResult:
    assert _WORKER_CFG is not None
    return _execute_run(_WORKER_CFG, run)


def run_experiment(cfg: ExperimentConfig, workers: Optional[int] = None) -> List[RunResult]:
    """Execute every run of ``cfg`` and return results ordered by run index."""
    workers = worker_count() if workers is None else workers
    runs = range(cfg.runs)
    if workers <= 1 or cfg.runs == 1:
        return [_execute_run(cfg, i) for i in runs]
    chunk = max(1, cfg.runs // (4 * workers))
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(cfg.to_dict(),)) as pool:
        results = list(pool.map(_worker_run, runs, chunksize=chunk))
    return sorted(results, key=lambda r: r.run)


def write_rounds_csv(results: List[RunResult], path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for res in sorted(results, key=lambda r: r.run):
        for row in res.rows:
            writer.writerow([fmt(v) for v in row])
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(buf.getvalue())


def _bound_curves(cfg: ExperimentConfig) -> Dict[str, List[float]]:
    inst = cfg.get_instance()
    model, prior = inst.model, inst.prior
    k = model.n_actions
    ts = np.arange(1, cfg.horizon + 1)
    curves: Dict[str, List[float]] = {}
    if isinstance(prior, ParameterGrid) and model.bernoulli:
        h = entropy(prior)
        curves["entropy_rho_2K"] = [bound_theorem1(2 * k, t, h) for t in ts]
        if isinstance(model, TabularBernoulli):
            curves["finite_prior"] = [bound_theorem3(k, t, prior.size) for t in ts]
        if isinstance(model, LogisticLinear):
            s, c, d = prior.radius, model.lipschitz, model.dim
            curves["logistic"] = [bound_theorem4(k, t, d, s, c) for t in ts]
    if isinstance(model, GaussianLinear) and not isinstance(prior, ParameterGrid):
        lam, b, sig = prior.prior_scale, model.feature_bound, model.noise_std
        curves["gaussian"] = [bound_gaussian(model.dim, t, k, lam, b, sig) for t in ts]
    return curves


def aggregate(cfg: ExperimentConfig, results: List[RunResult]) -> Dict[str, Any]:
    """Report: mean cumulative regret with standard errors, bound curves and checks."""
    results = sorted(results, key=lambda r: r.run)
    done = [r for r in results if r.error is None]
    report: Dict[str, Any] = {
        "config": cfg.to_dict(),
        "runs": cfg.runs,
        "completed": len(done),
        "aborted": [{"run": r.run, "error": r.error} for r in results if r.error is not None],
    }
    checks = []
    if done:
        cum = np.stack([r.cum_regret for r in done])
        m = cum.shape[0]
        mean = cum.mean(axis=0)
        se = cum.std(axis=0, ddof=1) / math.sqrt(m) if m > 1 else np.zeros_like(mean)
        report["mean_cum_regret"] = mean.tolist()
        report["stderr_cum_regret"] = se.tolist()
        report["final"] = {"mean": float(mean[-1]), "stderr": float(se[-1])}
        curves = _bound_curves(cfg)
        report["bounds"] = curves
        for name, curve in curves.items():
            observed = float(mean[-1] + 3 * se[-1])
            checks.append(
                {
                    "name": f"final_regret_vs_{name}",
                    "observed": observed,
                    "limit": curve[-1],
                    "margin": curve[-1] - observed,
                    "passed": observed <= curve[-1],
                    "note": "mean + 3 standard errors",
                }
            )
        rhos = [r.extras["max_rho"] for r in done if "max_rho" in r.extras]
        if rhos:
            k = cfg.get_instance().model.n_actions
            report["max_rho"] = max(rhos)
            checks.append(
                {"name": "rho_le_2K", "observed": max(rhos), "limit": 2.0 * k,
                 "margin": 2.0 * k - max(rhos), "passed": max(rhos) <= 2.0 * k + 1e-9}
            )
        if cfg.diagnostics:
            viol = sum(r.extras.get("bound_violations", 0.0) for r in done)
            checks.append({"name": "per_round_bound_violations", "observed": viol, "limit": 0.0,
                           "margin": -viol, "passed": viol == 0})
        pots = [r.extras["potential_sum"] for r in done if "potential_sum" in r.extras]
        if pots:
            inst = cfg.get_instance()
            lim = elliptical_potential_bound(
                inst.model.dim, cfg.horizon, inst.prior.prior_scale, inst.model.feature_bound, inst.model.noise_std
            )
            checks.append({"name": "elliptical_potential", "observed": max(pots), "limit": lim,
                           "margin": lim - max(pots), "passed": max(pots) <= lim})
        infos = [r.extras["information_sum"] for r in done if "information_sum" in r.extras]
        if infos:
            inst = cfg.get_instance()
            report["mean_information_sum"] = float(np.mean(infos))
            report["prior_entropy"] = entropy(inst.prior)
            if isinstance(inst.model, LogisticLinear):
                report["ball_cover_bound_log"] = inst.model.dim * math.log(
                    2 * inst.prior.radius * inst.model.lipschitz * cfg.horizon + 1
                )
    report["checks"] = checks
    return _round12(report)


def write_report(report: Dict[str, Any], path) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
