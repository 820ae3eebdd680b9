import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=200, deadline=None, derandomize=True)
settings.load_profile("default")

SEED = 42


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)
