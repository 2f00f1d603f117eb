import csv

import numpy as np
import pytest
from django.core.exceptions import ValidationError

from adsorption.solver import GAS, Grid
from core import exports


def read_rows(path):
    with open(path) as stream:
        return list(csv.reader(stream))


@pytest.fixture
def sample_fields(rng):
    grid = Grid()
    truth = rng.uniform(size=grid.shape)
    return grid, truth, truth + 0.01


class TestExportSample:
    def test_parity_has_one_row_per_grid_point(self, sample_fields, tmp_path):
        grid, truth, prediction = sample_fields

        paths = exports.export_sample(tmp_path, 3, GAS, truth, prediction, grid, [exports.PARITY])

        rows = read_rows(paths[0])
        assert rows[0] == ['true', 'pred']
        assert len(rows) - 1 == 100 * 101

    def test_oracle_parity_lies_on_diagonal(self, sample_fields, tmp_path):
        grid, truth, _ = sample_fields

        paths = exports.export_sample(tmp_path, 0, GAS, truth, truth, grid, [exports.PARITY])

        assert all(true == pred for true, pred in read_rows(paths[0])[1:])

    def test_heatmaps_hold_prediction_and_error(self, sample_fields, tmp_path):
        grid, truth, prediction = sample_fields

        pred_path, error_path = exports.export_sample(
            tmp_path, 0, GAS, truth, prediction, grid, [exports.HEATMAP])

        errors = np.array([float(row[2]) for row in read_rows(error_path)[1:]])
        assert read_rows(pred_path)[0] == ['xi', 'tau', 'value']
        np.testing.assert_allclose(errors, 0.01, rtol=1e-9)

    def test_snapshots_are_exact_columns(self, sample_fields, tmp_path):
        grid, truth, prediction = sample_fields

        true_path, _ = exports.export_sample(
            tmp_path, 0, GAS, truth, prediction, grid, [exports.SNAPSHOTS], taus=[0.0, 0.5, 1.0])

        rows = read_rows(true_path)
        assert rows[0] == ['xi', 'tau=0', 'tau=0.5', 'tau=1']
        values = np.array([[float(item) for item in row[1:]] for row in rows[1:]])
        np.testing.assert_array_equal(values, truth[:, [0, 50, 100]])

    def test_five_labelled_slices(self, sample_fields):
        grid, _, _ = sample_fields

        assert exports.snapshot_columns(grid, exports.DEFAULT_TAUS) == [0, 25, 50, 75, 100]

    def test_if_tau_is_between_levels_raises_error(self, sample_fields):
        grid, _, _ = sample_fields

        with pytest.raises(ValidationError):
            exports.snapshot_columns(grid, [0.333])


class TestParsing:
    def test_products(self):
        assert exports.parse_products('parity, snapshots') == ['parity', 'snapshots']

    def test_if_product_is_unknown_raises_error(self):
        with pytest.raises(ValidationError):
            exports.parse_products('parity,movie')
