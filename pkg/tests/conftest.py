import numpy as np
import pytest

from normforge import NormSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def tri():
    """Sup-norm on R^2 with the extra facet 0.8 x + 0.6 y."""
    return NormSpec.from_dense([[1, 0], [0, 1], [0.8, 0.6]], name="tri")


@pytest.fixture
def canonical3():
    return NormSpec.canonical(3)
