import numpy as np
import pytest

import spectralmap as sm


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "slow: round trips and refinement sweeps (deselect with "
        "'-m \"not slow\"')"
    )


def step_function(x):
    return np.where(x < np.pi / 2, 0.0, 1.0)


@pytest.fixture(scope="session")
def grid():
    return sm.RealGrid.uniform(200)


@pytest.fixture(scope="session")
def coarse_grid():
    return sm.RealGrid.uniform(16)


@pytest.fixture(scope="session")
def sigma_zero(grid):
    return sm.PotentialSigma.constant(grid, 0.0)


@pytest.fixture(scope="session")
def sigma_const(grid):
    return sm.PotentialSigma.constant(grid, 0.5)


@pytest.fixture(scope="session")
def sigma_sine(grid):
    return sm.PotentialSigma.from_function(grid, lambda x: 0.3 * np.sin(x))


@pytest.fixture(scope="session")
def sigma_step(grid):
    return sm.PotentialSigma.from_function(grid, step_function)


@pytest.fixture(scope="session")
def const_data(sigma_const):
    # sigma = 0.5, H = 0, n = 0..40.
    return sm.spectral_data(sigma_const, 0.0, 41)


@pytest.fixture(scope="session")
def sine_data(sigma_sine):
    # sigma = 0.3 sin x, H = 0.2, n = 0..40.
    return sm.spectral_data(sigma_sine, 0.2, 41)


@pytest.fixture(scope="session")
def model_pd(grid):
    return sm.PDRepresentation(grid, np.zeros(len(grid)), 0.0)
