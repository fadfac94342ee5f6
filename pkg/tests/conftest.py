import math

import numpy as np
import pytest
from hypothesis import settings

from psimt.geometry import make_sphere

settings.register_profile("psimt", max_examples=60, deadline=None)
settings.load_profile("psimt")

THETAS = [0.0, math.pi / 2, math.pi, 1.5 * math.pi]


@pytest.fixture(scope="session")
def sphere2():
    return make_sphere(level=2)


@pytest.fixture(scope="session")
def sphere3():
    return make_sphere(level=3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
