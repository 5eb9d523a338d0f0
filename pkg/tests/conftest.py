import numpy as np
import pytest

from helpers import ACCEPTANCE_RESULTS, humanoid


@pytest.fixture
def skel():
    return humanoid()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_RESULTS.items()):
            terminalreporter.write_line(line)
