import numpy as np
import pytest
from scipy.stats import ortho_group

_ACCEPTANCE_LINES: list[str] = []


def random_orthogonal(n, rng):
    if n == 1:
        return np.ones((1, 1))
    return ortho_group.rvs(n, random_state=rng)


def random_spd(n, rng, lo=0.5, hi=2.0):
    """Dense SPD matrix with eigenvalues log-uniform in [lo, hi] and a random eigenbasis."""
    t = random_orthogonal(n, rng)
    w = np.exp(rng.uniform(np.log(lo), np.log(hi), n))
    m = (t * w) @ t.T
    return 0.5 * (m + m.T)


@pytest.fixture
def rng():
    return np.random.default_rng(20221015)


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
