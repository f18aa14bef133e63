"""Command line entry point.

    liftedts run CONFIG [--workers N]
    liftedts verify SUITE
    liftedts sweep CONFIG --param model.n_actions --values 2,4,8 [--out-dir DIR]

Worker count defaults to the ``LIFTEDTS_WORKERS`` environment variable, then
to the number of CPUs.
"""
from __future__ import annotations

import argparse
import copy
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, List, Optional

from .config import ConfigError, load_config, parse_config
from .runner import aggregate, run_experiment, write_report, write_rounds_csv
from .verify import DEFAULT_SUITES, SUITES, format_check, run_suite

logger = logging.getLogger("liftedts")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG = 2


def _print_checks(checks) -> bool:
    ok = True
    for c in checks:
        if isinstance(c, dict):
            status = "PASS" if c["passed"] else "FAIL"
            print(f"{status} {c['name']}: observed={c['observed']:.6g} limit={c['limit']:.6g} margin={c['margin']:.3g}")
            ok &= bool(c["passed"])
        else:
            print(format_check(c))
            ok &= c.passed
    return ok


def _execute(cfg, workers: Optional[int], rounds_csv: str, report_json: str) -> dict:
    t0 = time.perf_counter()
    results = run_experiment(cfg, workers)
    report = aggregate(cfg, results)
    write_rounds_csv(results, rounds_csv)
    write_report(report, report_json)
    logger.info("%d runs in %.1fs -> %s, %s", cfg.runs, time.perf_counter() - t0, rounds_csv, report_json)
    return report


def cmd_run(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = _execute(cfg, args.workers, args.rounds_csv or cfg.rounds_csv, args.report or cfg.report_json)
    if "final" in report:
        print(f"mean final regret {report['final']['mean']:.6g} (stderr {report['final']['stderr']:.3g})")
    for a in report["aborted"]:
        print(f"run {a['run']} aborted: {a['error']}", file=sys.stderr)
    return EXIT_OK if _print_checks(report["checks"]) else EXIT_CHECK_FAILED


def cmd_verify(args) -> int:
    try:
        checks = run_suite(args.suite)
    except KeyError as exc:
        print(f"error: {exc.args[0]}", file=sys.stderr)
        return EXIT_CONFIG
    ok = _print_checks(checks)
    failed = [c.name for c in checks if not c.passed]
    if failed:
        print(f"{len(failed)} check(s) failed: {', '.join(failed)}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _set_path(data: dict, path: str, value: Any) -> None:
    keys = path.split(".")
    node = data
    for k in keys[:-1]:
        if not isinstance(node.get(k), dict):
            raise ConfigError(f"--param {path}: '{k}' is not an object in the config")
        node = node[k]
    node[keys[-1]] = value


def _parse_values(text: str) -> List[Any]:
    out = []
    for item in text.split(","):
        item = item.strip()
        try:
            out.append(json.loads(item))
        except json.JSONDecodeError:
            out.append(item)
    return out


def cmd_sweep(args) -> int:
    try:
        base = load_config(args.config).to_dict()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out_dir = Path(args.out_dir)
    summary = []
    ok = True
    for value in _parse_values(args.values):
        data = copy.deepcopy(base)
        try:
            _set_path(data, args.param, value)
            cfg = parse_config(data, source=f"{args.config} [{args.param}={value}]")
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        sub = out_dir / f"{args.param}={value}"
        report = _execute(cfg, args.workers, str(sub / "rounds.csv"), str(sub / "report.json"))
        entry = {"value": value, **report.get("final", {}), "checks": report["checks"]}
        summary.append(entry)
        print(f"{args.param}={value}: mean final regret {entry.get('mean', float('nan')):.6g}")
        ok &= _print_checks(report["checks"])
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "sweep.json").write_text(json.dumps({"param": args.param, "results": summary}, indent=2) + "\n")
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="liftedts", description="Thompson Sampling simulations and bound checks.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a Monte Carlo experiment from a JSON config")
    r.add_argument("config")
    r.add_argument("--workers", type=int, default=None)
    r.add_argument("--rounds-csv", default=None, help="override output.rounds_csv")
    r.add_argument("--report", default=None, help="override output.report_json")
    r.set_defaults(func=cmd_run)

    v = sub.add_parser("verify", help="run an invariant suite")
    v.add_argument("suite", choices=[*SUITES, "all", "acceptance"],
                   help=f"'all' runs: {', '.join(DEFAULT_SUITES)}")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("sweep", help="repeat an experiment over values of one config field")
    s.add_argument("config")
    s.add_argument("--param", required=True, help="dotted path, e.g. model.n_actions or horizon")
    s.add_argument("--values", required=True, help="comma-separated JSON values")
    s.add_argument("--out-dir", default="sweep")
    s.add_argument("--workers", type=int, default=None)
    s.set_defaults(func=cmd_sweep)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
