import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from holophys.field import OpticalGrid

settings.register_profile(
    "unit",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("unit")


@pytest.fixture
def grid16():
    return OpticalGrid(16, 1.12, 0.53, 1.0)


@pytest.fixture
def grid64():
    return OpticalGrid(64, 1.12, 0.53, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def random_field_values(rng, n, scale=1.0):
    return scale * (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
