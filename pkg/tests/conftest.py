import numpy as np
import pytest

from growthlab.space import build_space, dyadic_space


@pytest.fixture
def two_atoms():
    return build_space([("a", 0.5), ("b", 0.5)], [[["a", "b"]], [["a"], ["b"]]])


@pytest.fixture
def dyadic3():
    return dyadic_space(3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
