import json

import numpy as np
import pytest
from django.core.management import CommandError, call_command

from adsorption.ic_gen import DatasetConfig, build_dataset, save_dataset
from adsorption.physics import PhysicalParams, dimensionless_coefficients
from adsorption.solver import Grid


@pytest.fixture
def run_command():
    """Runs a management command and returns its exit code."""
    def do_run_command(name, *args, **options):
        try:
            call_command(name, *args, **options)
        except CommandError as error:
            return error.returncode
        return 0
    return do_run_command


@pytest.fixture
def config_file(tmp_path):
    def do_config_file(payload):
        path = tmp_path / 'run.json'
        path.write_text(json.dumps(payload))
        return str(path)
    return do_config_file


@pytest.fixture
def short_grid_config(config_file):
    """A run configuration with few time levels so command tests stay quick."""
    return config_file({'grid': {'n_x': 100, 'n_t': 3}})


@pytest.fixture
def stored_dataset(tmp_path):
    def do_stored_dataset(n_samples=12, grid=None, name='dataset'):
        coeffs = dimensionless_coefficients(PhysicalParams())
        config = DatasetConfig(n_samples=n_samples)
        dataset = build_dataset(config, 5, coeffs, grid=grid or Grid(n_x=100, n_t=101))
        directory = tmp_path / name
        save_dataset(dataset, directory)
        return dataset, str(directory)
    return do_stored_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(0)
