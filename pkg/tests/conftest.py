import pytest
from hypothesis import HealthCheck, settings

from csclock.dataset import load_bundled

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def cs():
    return load_bundled("cs_default")


@pytest.fixture(scope="session")
def rb():
    return load_bundled("rb87_default")


@pytest.fixture(scope="session")
def clock_states(cs):
    return cs.level("6s1/2", 4, 4), cs.level("5d5/2", 6, 6)
