import numpy as np
import pytest

from adsorption.ic_gen import DatasetConfig, build_dataset
from adsorption.physics import PhysicalParams, dimensionless_coefficients
from adsorption.solver import GAS, Grid
from operator_net.deeponet import Architecture, build_model


@pytest.fixture
def tiny_grid():
    return Grid(n_x=8, n_t=5)


@pytest.fixture
def tiny_architecture(tiny_grid):
    return Architecture(n_sensors=tiny_grid.n_x, hidden_layers=2, width=6, latent=4, omega0=20.0)


@pytest.fixture
def make_model(tiny_architecture):
    def do_make_model(seed=0, phase=GAS, architecture=None, dtype=np.float64):
        return build_model(architecture or tiny_architecture, phase,
                           np.random.default_rng(seed), dtype=dtype)
    return do_make_model


@pytest.fixture
def tiny_dataset(tiny_grid):
    config = DatasetConfig(n_samples=40, split_sizes={'train': 24, 'val': 8, 'test': 8})
    coeffs = dimensionless_coefficients(PhysicalParams())
    return build_dataset(config, 11, coeffs, grid=tiny_grid)


@pytest.fixture
def central_difference():
    """Central finite differences of ``loss()`` over every entry of ``params``."""
    def do_central_difference(loss, params, h=1e-6):
        grads = []
        for p in params:
            grad = np.zeros_like(p)
            for index in np.ndindex(p.shape):
                original = p[index]
                p[index] = original + h
                upper = loss()
                p[index] = original - h
                lower = loss()
                p[index] = original
                grad[index] = (upper - lower) / (2 * h)
            grads.append(grad)
        return grads
    return do_central_difference


@pytest.fixture
def relative_gap():
    def do_relative_gap(analytic, numeric):
        a = np.concatenate([g.ravel() for g in analytic])
        n = np.concatenate([g.ravel() for g in numeric])
        return np.linalg.norm(a - n) / max(np.linalg.norm(a), np.linalg.norm(n), 1e-300)
    return do_relative_gap
