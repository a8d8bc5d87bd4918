import os

import numpy as np
import pytest

PROSTATE_PATH = os.path.join(os.path.dirname(__file__), "..", "data", "prostate.data")


@pytest.fixture(scope="session")
def prostate_path():
    if not os.path.exists(PROSTATE_PATH):
        pytest.skip("prostate.data not present")
    return PROSTATE_PATH


@pytest.fixture(scope="session")
def prostate_splits(prostate_path):
    from bridgekit.datasets import load_prostate

    return load_prostate(prostate_path)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
