import numpy as np
import pytest

from cvmemory.gaussian import QuadratureOrdering, light


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def ordering4():
    return QuadratureOrdering(light(i) for i in range(1, 5))


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance  # noqa: PLC0415

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in test_acceptance.RESULTS:
            terminalreporter.write_line(line)
