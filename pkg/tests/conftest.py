import numpy as np
import pytest

from semihilbert.metric import new_metric
from semihilbert.opspace import try_lift


def cgauss(rng, shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def hand():
    """A = diag(1, 0), T = [[3, 0], [5, 7]]: compression [3]."""
    m = new_metric(np.diag([1.0, 0.0]))
    return m, try_lift(m, np.array([[3.0, 0.0], [5.0, 7.0]]))


@pytest.fixture
def diag3():
    return new_metric(np.diag([1.0, 0.25, 0.0]))


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[key])
