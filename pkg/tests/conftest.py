import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from carnot_ineq.group import make_heisenberg, random_step_two
from carnot_ineq.measures import BoltzmannMeasure, GProfile, mcmc_sample

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def H1():
    return make_heisenberg(1, 16.0)


@pytest.fixture(scope="session")
def H2():
    return make_heisenberg(2, 16.0)


@pytest.fixture(scope="session")
def G42():
    return random_step_two(4, 2, seed=7, a=1.0)


@pytest.fixture(scope="session")
def mu4(H1):
    return BoltzmannMeasure(H1, GProfile.power(4))


@pytest.fixture(scope="session")
def chain4(mu4):
    return mcmc_sample(mu4, 100_000, seed=1)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
