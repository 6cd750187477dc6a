import numpy as np
import pytest

from seaqt.sea import SeaModel

FOUR_LEVELS = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)

# lines recorded by the acceptance tests, echoed in the terminal summary
ACCEPTANCE_LINES = []


@pytest.fixture
def four_level_model():
    return SeaModel.from_levels(FOUR_LEVELS)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
