"""End-to-end acceptance criteria at their stated scales and tolerances.

Each test prints one PASS/FAIL line (also collected into the terminal summary)
and asserts both the inequality checks and the runtime budget.
"""
import time

import pytest

from liftedts.harness.verify import format_check, run_suite


def run_criterion(log, number, title, budget_s, suites):
    t0 = time.perf_counter()
    checks = []
    for name, kwargs in suites:
        checks.extend(run_suite(name, **kwargs))
    elapsed = time.perf_counter() - t0
    ok = all(c.passed for c in checks) and elapsed < budget_s
    line = f"{'PASS' if ok else 'FAIL'} criterion {number} ({title}): {elapsed:.1f}s of {budget_s:.0f}s budget"
    details = [format_check(c) for c in checks]
    print(line)
    for d in details:
        print("    " + d)
    log.append(line)
    log.extend("    " + d for d in details)
    failed = [c.name for c in checks if not c.passed]
    assert not failed, f"failed checks: {failed}"
    assert elapsed < budget_s, f"runtime {elapsed:.1f}s exceeds {budget_s}s"
    return checks


def test_criterion_1_conjugacy(acceptance_log):
    run_criterion(acceptance_log, 1, "conjugate closed form vs grid oracle", 5, [("conjugacy", {"grid_points": 100_000})])


def test_criterion_2_telescoping(acceptance_log):
    run_criterion(acceptance_log, 2, "telescoping identity", 10,
                  [("telescoping", {"n_instances": 100, "max_atoms": 50, "max_horizon": 100})])


def test_criterion_3_regret_information_exact(acceptance_log):
    checks = run_criterion(acceptance_log, 3, "regret vs lifted information, rho <= 2K", 30,
                           [("lemma6", {"n_rounds": 1000}), ("lemma1", {"n_rounds": 1000})])
    assert next(c for c in checks if c.name == "lemma6.violations").observed == 0


def test_criterion_4_linear_structure(acceptance_log):
    run_criterion(acceptance_log, 4, "linear Bernoulli: rank, trace, decoupling, Pinsker", 60,
                  [("lemma8", {"n_instances": 200}), ("lemma2", {"n_instances": 200})])


def test_criterion_5_finite_prior_regret(acceptance_log):
    checks = run_criterion(acceptance_log, 5, "finite prior regret bound, K=2 N=16 T=200 M=2000", 120,
                           [("finite_prior", {"runs": 2000, "horizon": 200, "n_atoms": 16, "n_contexts": 4, "n_actions": 2})])
    assert checks[0].limit == pytest.approx(47.10, abs=0.01)


def test_criterion_6_logistic_regret_and_cover_chain(acceptance_log):
    checks = run_criterion(acceptance_log, 6, "logistic regret bound and covering chain, d=2 K=3 T=100 M=1000", 300,
                           [("logistic", {"runs": 1000, "horizon": 100, "dim": 2, "n_actions": 3})])
    bound = next(c for c in checks if c.name == "logistic.mean_regret").limit
    # exact value of the closed form; the rounded figure quoted alongside it (82.5) is an arithmetic slip
    assert bound == pytest.approx(83.45, abs=0.01)


def test_criterion_7_gaussian(acceptance_log):
    run_criterion(acceptance_log, 7, "Gaussian linear: ratio, elliptical potential, regret bound", 300,
                  [("gaussian", {"dims": (2, 4), "actions": (2, 8), "horizon": 200, "runs": 500, "draws": 10_000})])


def test_criterion_8_probability_matching(acceptance_log):
    run_criterion(acceptance_log, 8, "probability matching", 30,
                  [("matching", {"n_instances": 20, "draws": 100_000})])


def test_criterion_9_revealing_instance(acceptance_log):
    run_criterion(acceptance_log, 9, "revealing instance, K=2", 5, [("revealing", {"n_actions": 2})])
