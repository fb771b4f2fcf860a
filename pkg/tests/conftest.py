import numpy as np
import pytest

from anyonpt import Grid, PoschlTeller


@pytest.fixture
def sym_grid():
    return Grid(-30.0, 30.0, 600)


@pytest.fixture
def fine_grid():
    return Grid(-25.0, 25.0, 1250)


@pytest.fixture
def pt_well():
    return PoschlTeller(nu=1.0, delta=0.2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
