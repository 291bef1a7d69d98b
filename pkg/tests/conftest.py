import numpy as np
import pytest
from hypothesis import settings

from rieszshape.verify import random_star

# mpmath oracles have erratic first-call latency
settings.register_profile("default", deadline=None)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def star(rng):
    return random_star(rng)
