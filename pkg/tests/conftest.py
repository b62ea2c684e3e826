import numpy as np
import pytest
from hypothesis import settings

from hyperlsm.geometry import lift_to_hyperboloid

settings.register_profile("default", max_examples=50, deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_points(rng, n, d=2, scale=1.5):
    """``n`` hyperboloid points with spatial coordinates of moderate size."""
    w = np.zeros((n, d + 1))
    w[:, :d] = rng.normal(scale=scale, size=(n, d))
    return lift_to_hyperboloid(w)
