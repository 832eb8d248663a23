import numpy as np
import pytest

from optfeedback.linalg import haar_unitary, random_state_vector


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def haar(rng):
    def make(n):
        return haar_unitary(n, rng)

    return make


@pytest.fixture
def rand_state(rng):
    def make(dim=2):
        return random_state_vector(dim, rng)

    return make


def random_kraus_pair(rng):
    """Completeness-satisfying pair: controller blocks of a Haar unitary."""
    U = haar_unitary(4, rng)
    return U[:2, :2], U[2:, :2]
