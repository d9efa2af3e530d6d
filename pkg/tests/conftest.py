import os

import pytest
from hypothesis import HealthCheck, settings

from mmwave_ee.model import FadingModel, NetworkParams, PathLossModel

settings.register_profile(
    "default", deadline=None, max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", deadline=None, max_examples=300)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

TABLE_LAMBDA_M = 4.973e-5
FIG4_LAMBDA_M = 5.093e-6
DENSE_LAMBDA_M = 8e-4


@pytest.fixture
def table_params():
    return NetworkParams()


@pytest.fixture
def hetnet_params():
    return NetworkParams(lambda_f=10 * TABLE_LAMBDA_M)


def params_with(m=1, beta=0.003, **kw):
    return NetworkParams(fading=FadingModel(m), path_loss=PathLossModel(beta_blockage=beta), **kw)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s[1:s.index(" ")])):
            terminalreporter.write_line(line)
