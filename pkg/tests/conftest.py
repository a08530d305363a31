import numpy as np
import pytest

from cnnloh import MixtureModel

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def reference_model():
    """The parameter-recovery model used throughout the tests."""
    return MixtureModel.from_params(1 / 3, 0.1, 8.0, 0.2, 8.0)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
