import numpy as np
import pytest

from rdblowup.core import Params


@pytest.fixture
def rng():
    return np.random.default_rng(42)


# Parameter grid shared by the identity-heavy suites.
PARAM_GRID = [
    Params(p, q, mu)
    for p in (1.5, 2.0, 3.0)
    for q in (1.5, 2.0, 3.0)
    for mu in (0.5, 1.0, 2.0)
]

SMALL_GRID = [
    Params(3.0, 3.0, 1.0),
    Params(3.0, 3.0, 2.0),
    Params(2.0, 5.0, 0.5),
    Params(1.5, 2.0, 2.0),
]
