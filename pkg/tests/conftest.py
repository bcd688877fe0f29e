from fractions import Fraction

import pytest

from discspaces.construction import BuildConfig, WeightFunction, build

ACCEPTANCE_LINES: list = []


@pytest.fixture(scope="session")
def witness6():
    return build(BuildConfig(steps=6, nu_schedule="1/k"))


@pytest.fixture(scope="session")
def witness3():
    return build(BuildConfig(steps=3, nu_schedule="1/k"))


@pytest.fixture(scope="session")
def witness_phi():
    # single exponent, log weight: enough steps for the hypothesis ratio of small cells
    return build(BuildConfig(steps=14, nu=Fraction(1), phi=WeightFunction("log-reciprocal")))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
