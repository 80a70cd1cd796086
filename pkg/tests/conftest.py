import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ncerg.algebra import AlgebraSpec

settings.register_profile(
    "ncerg", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("ncerg")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def m2():
    return AlgebraSpec.matrix(2, 1.0)


@pytest.fixture
def mixed_alg():
    return AlgebraSpec.from_json(
        {"blocks": [{"dim": 3, "weight": 1.0}, {"dim": 1, "weight": 0.5}, {"dim": 2, "weight": 2.0}]}
    )


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
