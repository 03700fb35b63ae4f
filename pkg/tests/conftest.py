import numpy as np
import pytest

from gaussnet import make_gmm_model, sample_points


@pytest.fixture(scope="session")
def gmm():
    return make_gmm_model(128, 4, 3, seed=7)


@pytest.fixture(scope="session")
def gmm_cloud(gmm):
    return sample_points(gmm, 200, seed=1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
