import numpy as np
import pytest

from itergcp import GcpParams, IgcpParams


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def outer():
    return GcpParams([1.0, 0.5])


@pytest.fixture
def igcp_params():
    return IgcpParams.from_rates([1.0, 0.5], [0.6, 0.2])
