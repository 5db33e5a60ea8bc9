import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

coords = st.floats(-10.0, 10.0, allow_nan=False, allow_infinity=False, width=64)
params = st.floats(0.0, 1.0, allow_nan=False)


def nets(max_degree=4, min_degree=1):
    """Random control nets of shape (n + 1, m + 1, 3)."""
    return st.tuples(st.integers(min_degree, max_degree), st.integers(min_degree, max_degree)).flatmap(
        lambda nm: arrays(np.float64, (nm[0] + 1, nm[1] + 1, 3), elements=coords))


def random_net(rng, n=3, m=3):
    return rng.normal(size=(n + 1, m + 1, 3))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
