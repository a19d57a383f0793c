import numpy as np
import pytest

from levy_invert import AtomicMeasure, StableMeasure
from levy_invert.stable import symmetric_sigma


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def stable12():
    return StableMeasure(1.2, symmetric_sigma(0.5))


@pytest.fixture
def two_atoms():
    return AtomicMeasure([[1.0], [-1.0]], [1.0, 1.0])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
