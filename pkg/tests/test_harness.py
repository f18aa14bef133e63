import json
import random

import numpy as np
import pytest

from liftedts.harness import cli, runner, verify
from liftedts.harness.config import ConfigError, load_config, parse_config
from liftedts.harness.runner import aggregate, run_experiment, write_rounds_csv
from liftedts.harness.seeding import derive_run_seed, run_rng, splitmix64_finalize


def test_seed_derivation_is_pure_and_documented():
    assert derive_run_seed(42, 3) == derive_run_seed(42, 3)
    # reference value of the SplitMix64 finalizer at 0 after one gamma step
    assert splitmix64_finalize(0x9E3779B97F4A7C15) == 0xE220A8397B1DCDAF
    assert derive_run_seed(0, 1) == 0xE220A8397B1DCDAF
    with pytest.raises(ValueError):
        derive_run_seed(1, -1)


def test_adjacent_runs_never_collide():
    rng = random.Random(7)
    for _ in range(1_000_000):
        s = rng.getrandbits(64)
        assert derive_run_seed(s, 0) != derive_run_seed(s, 1)


def test_adjacent_streams_look_independent():
    a = run_rng(2024, 10).random(100_000) < 0.5
    b = run_rng(2024, 11).random(100_000) < 0.5
    assert abs(np.corrcoef(a, b)[0, 1]) < 0.01


def write_cfg(tmp_path, **overrides):
    cfg = {
        "model": {"kind": "tabular_bernoulli", "n_atoms": 6, "n_contexts": 2, "n_actions": 3, "instance_seed": 3},
        "prior": {"kind": "uniform"},
        "adversary": {"kind": "iid_uniform"},
        "horizon": 20,
        "runs": 6,
        "master_seed": 11,
        "diagnostics": True,
        "output": {"rounds_csv": str(tmp_path / "rounds.csv"), "report_json": str(tmp_path / "report.json")},
    }
    cfg.update(overrides)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg, indent=2))
    return path


def test_run_single_atom_single_round(tmp_path):
    path = write_cfg(
        tmp_path,
        model={"kind": "tabular_bernoulli", "table": [[[0.2, 0.7]]]},
        horizon=1,
        runs=1,
    )
    assert cli.main(["run", str(path)]) == 0
    lines = (tmp_path / "rounds.csv").read_text().splitlines()
    assert lines[0] == ",".join(runner.CSV_COLUMNS)
    assert len(lines) == 2
    row = dict(zip(lines[0].split(","), lines[1].split(",")))
    assert row["instant_regret"] == "0" and row["t"] == "1" and row["a"] == "0"
    assert row["rho_t"] == "" and row["delta_t"] == ""


def test_run_is_byte_identical(tmp_path):
    path = write_cfg(tmp_path)
    assert cli.main(["run", str(path), "--workers", "1"]) == 0
    first = (tmp_path / "rounds.csv").read_bytes()
    report = (tmp_path / "report.json").read_bytes()
    assert cli.main(["run", str(path), "--workers", "1"]) == 0
    assert (tmp_path / "rounds.csv").read_bytes() == first
    assert (tmp_path / "report.json").read_bytes() == report


def test_worker_count_does_not_change_output(tmp_path):
    cfg = load_config(write_cfg(tmp_path))
    write_rounds_csv(run_experiment(cfg, workers=1), tmp_path / "a.csv")
    write_rounds_csv(run_experiment(cfg, workers=2), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_aggregation_ignores_completion_order(tmp_path):
    cfg = load_config(write_cfg(tmp_path))
    results = run_experiment(cfg, workers=1)
    shuffled = results[:]
    random.Random(3).shuffle(shuffled)
    assert aggregate(cfg, results) == aggregate(cfg, shuffled)


def test_report_contents(tmp_path):
    cfg = load_config(write_cfg(tmp_path, runs=20, horizon=30))
    report = aggregate(cfg, run_experiment(cfg, workers=1))
    assert len(report["mean_cum_regret"]) == 30
    assert len(report["bounds"]["finite_prior"]) == 30
    assert report["bounds"]["finite_prior"][-1] == pytest.approx(np.sqrt(2 * 3 * 30 * np.log(6)), rel=1e-11)
    assert all(c["passed"] for c in report["checks"])
    assert report["completed"] == 20 and report["aborted"] == []


def test_numeric_failure_aborts_only_that_run(tmp_path, monkeypatch):
    cfg = load_config(write_cfg(tmp_path, runs=3))
    real = runner.run_episode

    def flaky(prior, model, adversary, horizon, rng, **kw):
        if flaky.calls == 1:
            flaky.calls += 1
            raise np.linalg.LinAlgError("singular")
        flaky.calls += 1
        return real(prior, model, adversary, horizon, rng, **kw)

    flaky.calls = 0
    monkeypatch.setattr(runner, "run_episode", flaky)
    report = aggregate(cfg, run_experiment(cfg, workers=1))
    assert report["completed"] == 2
    assert report["aborted"][0]["run"] == 1 and "singular" in report["aborted"][0]["error"]


def test_config_errors_are_line_anchored(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "model": {"kind": "tabular_bernoulli", "n_atoms": 2, "n_contexts": 1, "n_actions": 2},\n'
                    '  "horizon": 0,\n  "runs": 1,\n  "master_seed": 1\n}\n')
    with pytest.raises(ConfigError) as exc:
        load_config(path)
    assert exc.value.line == 3 and "horizon" in str(exc.value)
    assert cli.main(["run", str(path)]) == 2
    assert f"{path}:3:" in capsys.readouterr().err

    path.write_text('{\n  "model": {"kind": "tabular_bernoulli",,}\n}\n')
    with pytest.raises(ConfigError) as exc:
        load_config(path)
    assert exc.value.line == 2


def test_config_dimension_mismatch_is_rejected():
    base = {"model": {"kind": "tabular_bernoulli", "n_atoms": 3, "n_contexts": 1, "n_actions": 2},
            "horizon": 5, "runs": 1, "master_seed": 0}
    with pytest.raises(ConfigError):
        parse_config({**base, "prior": {"kind": "weights", "weights": [0.5, 0.5]}})
    with pytest.raises(ConfigError):
        parse_config({**base, "adversary": {"kind": "fixed_sequence", "sequence": [0, 4]}})
    with pytest.raises(ConfigError):
        parse_config({**base, "model": {"kind": "mystery"}})


def test_other_model_kinds_run(tmp_path):
    for model, prior in [
        ({"kind": "logistic_linear", "dim": 2, "n_contexts": 2, "n_actions": 3}, {"kind": "ball_lattice", "spacing": 0.2}),
        ({"kind": "gaussian_linear", "dim": 2, "n_contexts": 3, "n_actions": 4}, {"kind": "gaussian", "scale": 1.0}),
        ({"kind": "revealing", "n_actions": 3}, {"kind": "uniform"}),
    ]:
        path = write_cfg(tmp_path, model=model, prior=prior, runs=2, horizon=8, diag_draws=2000)
        assert cli.main(["run", str(path)]) == 0, model["kind"]
        rows = (tmp_path / "rounds.csv").read_text().splitlines()
        assert len(rows) == 1 + 2 * 8


def test_sweep(tmp_path):
    path = write_cfg(tmp_path, runs=3, horizon=10)
    out = tmp_path / "sweep"
    assert cli.main(["sweep", str(path), "--param", "model.n_actions", "--values", "2,4", "--out-dir", str(out)]) == 0
    summary = json.loads((out / "sweep.json").read_text())
    assert [r["value"] for r in summary["results"]] == [2, 4]
    assert (out / "model.n_actions=4" / "rounds.csv").exists()
    assert cli.main(["sweep", str(path), "--param", "nope.x", "--values", "1", "--out-dir", str(out)]) == 2


def test_verify_passing_suite(capsys):
    assert cli.main(["verify", "telescoping"]) == 0
    assert "PASS telescoping.max_abs_lhs_minus_rhs" in capsys.readouterr().out


def test_verify_failure_names_check_and_seed(monkeypatch, capsys):
    def broken():
        return [verify.CheckResult("demo.inequality", 2.0, 1.0, seed=1234)]

    monkeypatch.setitem(verify.SUITES, "covers", broken)
    assert cli.main(["verify", "covers"]) == 1
    out = capsys.readouterr()
    assert "FAIL demo.inequality" in out.out and "1234" in out.out
    assert "demo.inequality" in out.err


def test_worker_env(monkeypatch):
    monkeypatch.setenv(runner.WORKERS_ENV, "3")
    assert runner.worker_count() == 3
    monkeypatch.delenv(runner.WORKERS_ENV)
    assert runner.worker_count() >= 1
