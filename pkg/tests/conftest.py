import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_simplex(rng, K, zeros=0):
    p = rng.dirichlet(np.ones(K))
    if zeros:
        p[rng.choice(K, zeros, replace=False)] = 0.0
        p /= p.sum()
    return p
