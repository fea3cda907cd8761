import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from sepcoset_lab.group_model import builtin
from sepcoset_lab.relative_graph import ExplorationBudget

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("lab", max_examples=40, deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("lab")

# acceptance lines collected by tests/test_acceptance.py
CRITERIA: list = []


@pytest.fixture(scope="session")
def fc():
    return builtin("fc")


@pytest.fixture(scope="session")
def fp():
    return builtin("fp")


@pytest.fixture(scope="session")
def budget():
    return ExplorationBudget()


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(CRITERIA, key=lambda s: int(s.split()[1].rstrip(":"))):
        terminalreporter.write_line(line)
