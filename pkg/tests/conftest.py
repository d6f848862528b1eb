import pytest
from hypothesis import settings

from uwqkd.channel_model import WATER_PROFILES
from uwqkd.config import default_system

settings.register_profile("uwqkd", deadline=None, max_examples=100, derandomize=True)
settings.load_profile("uwqkd")


@pytest.fixture
def sys30():
    """Reference parameters, 30 cm pupils, Scenario 1."""
    return default_system(0.30, scenario=1)


@pytest.fixture(params=sorted(WATER_PROFILES))
def water(request):
    return WATER_PROFILES[request.param]


@pytest.fixture
def clear():
    return WATER_PROFILES["clear"]
