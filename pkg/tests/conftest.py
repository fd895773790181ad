import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pcfband.lattice import Lattice2D
from pcfband.medium import eta_fourier_polygon, homogeneous, square_rod

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def square():
    return Lattice2D.square()


@pytest.fixture(scope="session")
def rod():
    return square_rod()


@pytest.fixture(scope="session")
def rod_table(rod):
    return eta_fourier_polygon(rod, 16)


@pytest.fixture(scope="session")
def air_table():
    return eta_fourier_polygon(homogeneous(2.1), 8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
