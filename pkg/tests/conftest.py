import pytest

from gibbstree.model import BoundaryFunction, ModelParams
from gibbstree.reduced import recover_xy, solve_z0

# Acceptance lines collected by tests/test_acceptance.py, echoed after the run.
ACCEPTANCE_LINES = []


def record(label, passed, detail):
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def branch_law(params, sign=1.0):
    """BoundaryFunction (x0, sign * y0) for a supercritical params."""
    x0, y0 = recover_xy(params, solve_z0(params))
    return BoundaryFunction(x0, sign * y0)


@pytest.fixture
def p219():
    return ModelParams(2, 1, 0.9)


@pytest.fixture
def law219(p219):
    return branch_law(p219)
