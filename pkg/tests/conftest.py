import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_psd(rng, n, rank=None):
    """Gram matrix of ``n`` random real vectors."""
    g = rng.standard_normal((n, rank or n))
    return g @ g.T
