import numpy as np
import pytest

from mather_lp.domain import LagrangianSpec, PotentialSpec
from mather_lp.holonomy import GridConfig, build_closed_measure_constraints, build_state_space

# Grid used throughout: dx = 1/64, dv = dx / h = 0.25, v_max = 2.
GRID = GridConfig(1, 64, 17, 1 / 16)
TINY = GridConfig(1, 4, 3, 0.25)


@pytest.fixture(scope="session")
def grid():
    return GRID


@pytest.fixture(scope="session")
def space():
    return build_state_space(GRID)


@pytest.fixture(scope="session")
def tiny_space():
    return build_state_space(TINY)


@pytest.fixture(scope="session")
def tiny_constraints(tiny_space):
    return build_closed_measure_constraints(tiny_space)


@pytest.fixture
def pendulum():
    return LagrangianSpec.mechanical(PotentialSpec.cosine(1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    acceptance = __import__("sys").modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(acceptance.RESULTS):
        passed, detail = acceptance.RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
