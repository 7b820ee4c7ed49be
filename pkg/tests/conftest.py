import os
import sys

import numpy as np
import pytest

# keep worker count modest under the test runner unless told otherwise
os.environ.setdefault("CHEEGERLAB_THREADS", "4")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
