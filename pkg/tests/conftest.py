import warnings

import numpy as np
import pytest

warnings.filterwarnings("ignore", module="numba")

from sweepfv.io import load_packaged_mesh
from sweepfv.mesh import refine_uniform
from sweepfv.solver import Discretization


@pytest.fixture(scope="session")
def square():
    return load_packaged_mesh("square_58.mesh")


@pytest.fixture(scope="session")
def square_fine(square):
    return refine_uniform(square)


@pytest.fixture(scope="session")
def shock_mesh():
    return load_packaged_mesh("shock_reflection.mesh")


@pytest.fixture(scope="session")
def disc_nosource(square):
    return Discretization(square, "euler_nosource")


@pytest.fixture(scope="session")
def disc_source(square):
    return Discretization(square, "euler_source")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
