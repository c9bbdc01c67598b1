import math

import pytest

from ccbond.model import ModelParams

TOY = ModelParams(r=2.0, q=2.0, sigma=math.sqrt(2.0), lam=4.0, c=1.0, gamma=1.0, K=0.8)

# filled by test_acceptance; echoed at the end of the run
ACCEPTANCE_LINES: list = []


@pytest.fixture
def toy():
    return TOY


@pytest.fixture
def high_k():
    return TOY


@pytest.fixture
def mid_k():
    return TOY.replace(K=0.6)


@pytest.fixture
def low_k():
    return TOY.replace(K=0.4)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
