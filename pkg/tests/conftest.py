import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_gradients(rng, n, d, scale=1.0):
    """Random gradient matrix with a nonzero mean so z is generically > 0."""
    return scale * (rng.standard_normal((n, d)) + 0.3 * rng.standard_normal(d))
