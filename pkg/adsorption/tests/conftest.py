import numpy as np
import pytest

from adsorption.physics import PhysicalParams, dimensionless_coefficients
from adsorption.solver import Grid, solve


@pytest.fixture
def params():
    return PhysicalParams()


@pytest.fixture
def coeffs(params):
    return dimensionless_coefficients(params)


@pytest.fixture
def grid():
    return Grid()


@pytest.fixture
def random_ic(grid):
    def do_random_ic(rng, low=0.0, high=1.0):
        return rng.uniform(low, high, size=grid.n_x)
    return do_random_ic


@pytest.fixture
def solve_ic(coeffs, grid):
    def do_solve_ic(ic, on_grid=None):
        return solve(np.asarray(ic, dtype=np.float64), coeffs, on_grid or grid)
    return do_solve_ic
