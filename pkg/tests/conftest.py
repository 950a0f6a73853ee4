import numpy as np
import pytest

from beampf import ArrayGeometry

# Five forward-facing mics on a tablet-like frame in the x-z plane, so a
# source at (az, el) = (90, 90) hits all mics with zero TDOA (broadside).
TABLET_POSITIONS = np.array(
    [
        [-0.10, 0.0, 0.095],
        [0.00, 0.0, 0.095],
        [0.10, 0.0, 0.095],
        [-0.10, 0.0, -0.095],
        [0.10, 0.0, -0.095],
    ]
)


@pytest.fixture(scope="session")
def tablet_array():
    return ArrayGeometry(TABLET_POSITIONS)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
