import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from latvar.geometry import Shape
from latvar.lattice import make_lattice

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def Z1():
    return make_lattice([[1.0]])


@pytest.fixture
def Z2():
    return make_lattice(np.eye(2))


@pytest.fixture
def Z3():
    return make_lattice(np.eye(3))


@pytest.fixture
def disk():
    return Shape.ball(1.0, 2)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
