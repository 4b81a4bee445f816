import math

import pytest
from hypothesis import HealthCheck, settings

from ssflow import cantor_flow, fibonacci_flow, golden_flow

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

LOG2, LOG3 = math.log(2), math.log(3)
PHI = (1 + math.sqrt(5)) / 2


@pytest.fixture
def cantor():
    return cantor_flow()


@pytest.fixture
def fibonacci():
    return fibonacci_flow()


@pytest.fixture
def golden():
    return golden_flow()
