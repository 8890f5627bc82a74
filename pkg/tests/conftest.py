import math

import pytest
from hypothesis import settings

from mmblockage.params import SystemParams

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")

OMEGA_60 = math.pi / 3


@pytest.fixture
def open_park():
    """Table defaults, open park, 200 BS/km^2."""
    return SystemParams()


@pytest.fixture
def urban():
    """Urban point: 100 static blockages/km^2, lambda_B = 0.1, omega = 60 deg, R = 100 m."""
    return SystemParams(static_density_lambda_S=1e-4, blocker_density_lambda_B=0.1)


def rel_err(a, b):
    return abs(a - b) / abs(b)


def pytest_terminal_summary(terminalreporter, config):
    from test_acceptance import ACCEPTANCE_KEY

    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
