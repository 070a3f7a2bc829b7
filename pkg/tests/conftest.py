"""Shared fixtures: one small 1D canonical problem reused across modules.

Session scope keeps the steady-state solve and generator assembly out of
individual test timings.
"""

import numpy as np
import pytest

from subfp import build_generator, build_grid, canonical_gradient_field, solve_steady

ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def field1d():
    return canonical_gradient_field(0.5, dim=1)


@pytest.fixture(scope="session")
def grid512():
    return build_grid(1, 25.0, 512)


@pytest.fixture(scope="session")
def gen512(grid512, field1d):
    return build_generator(grid512, field1d)


@pytest.fixture(scope="session")
def G512(gen512):
    return solve_steady(gen512)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
