import numpy as np
import pytest

from liftedts.belief import DiscreteBelief
from liftedts.model import ParameterGrid, TabularBernoulli


def belief_over(table, weights):
    """Discrete belief over the atoms of a tabular model with explicit weights."""
    table = np.asarray(table, dtype=float)
    if table.ndim == 2:
        table = table[:, None, :]
    w = np.asarray(weights, dtype=float)
    with np.errstate(divide="ignore"):
        belief = DiscreteBelief(ParameterGrid.tabular(len(w), w / w.sum()), np.log(w / w.sum()))
    return belief, TabularBernoulli(table)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


@pytest.fixture
def acceptance_log():
    """Collects one summary line per acceptance criterion for the terminal report."""
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
