import numpy as np
import pytest

from lowrankbasis.subspace import build_subspace


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rank_one_instance(m, n, d, seed):
    """Random rank-one basis and a mixed spanning set of its span."""
    rng = np.random.default_rng(seed)
    truth = [np.outer(rng.standard_normal(m), rng.standard_normal(n)) for _ in range(d)]
    W = rng.standard_normal((d, d))
    mixed = [sum(W[i, j] * truth[j] for j in range(d)) for i in range(d)]
    return build_subspace(mixed), truth


def nearest_angles(matrices, truth):
    from lowrankbasis.subspace import subspace_angle
    return [min(subspace_angle([X], [M]) for M in truth) for X in matrices]


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
