import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gmorrey.fields import Domain, ExponentField, Grid, ScalarField

settings.register_profile("default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def unit_interval_grid():
    """[-1, 1] with 64 cells."""
    return Grid(Domain.interval(-1.0, 1.0), 64)


@pytest.fixture
def line_grid():
    """Whole line truncated to [-4, 4], 1024 cells."""
    return Grid(Domain.whole_space(1, 4.0), 1024)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def constant_field(grid, c):
    return ScalarField(grid, np.full(grid.size, float(c)))


def step_exponent(grid, left, right, at=0.0):
    x = grid.centers[:, 0]
    return ExponentField(grid, np.where(x < at, left, right))


def rel(a, b):
    return abs(a - b) / max(abs(b), 1e-300)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
