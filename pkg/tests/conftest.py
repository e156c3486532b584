import os
import sys

import pytest
from hypothesis import HealthCheck, settings

from spheregrains import ModelParams, RadiusDistribution, Window

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

# Filled by test_acceptance; printed at the end of the session.
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def params25():
    return ModelParams(25.0, RadiusDistribution.uniform(0.05, 0.1))


@pytest.fixture
def unit():
    return Window.unit(2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
