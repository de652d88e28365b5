import numpy as np
import pytest

from kanlab.basins import BasinParams
from kanlab.skew import kan1994


@pytest.fixture(scope="session")
def kan():
    return kan1994()


@pytest.fixture(scope="session")
def calibrated_params():
    """Budget at which the classic map decides >99% of generic points.

    The boundary contraction rate is ~2.4e-4 per step, so reaching the
    delta=1e-6 neighborhood takes ~5e4 steps at the median and ~1.2e5 at
    the 99th percentile (measured); 250k covers virtually everything.
    """
    return BasinParams(n_max=250000, delta=1e-6, window=50)


@pytest.fixture(scope="session")
def sigma_graph_small(kan, calibrated_params):
    """Separating-map samples on a small grid, shared across tests."""
    from kanlab.central import separating_graph

    return separating_graph(kan, 256, calibrated_params, tol=1e-4)
