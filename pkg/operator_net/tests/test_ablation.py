import csv

import numpy as np
import pytest
from django.core.exceptions import ValidationError

from operator_net.ablation import (AblationRow, best_row, parse_pairs, run_lambda_ablation,
                                   write_ablation)
from operator_net.trainer import TrainConfig


@pytest.fixture
def short_config():
    return TrainConfig(max_epochs=3, val_every=1, early_stop_patience=10, lr=1e-3,
                       batch_size=8, seed=2)


class TestParsePairs:
    def test_reads_colon_separated_pairs(self):
        assert parse_pairs('3:1, 1:1,0.5:2') == [(3.0, 1.0), (1.0, 1.0), (0.5, 2.0)]

    @pytest.mark.parametrize('value', ['', '3', '3:1:2', 'a:b'])
    def test_if_value_is_malformed_raises_error(self, value):
        with pytest.raises(ValidationError):
            parse_pairs(value)


class TestRunLambdaAblation:
    def test_one_row_per_pair_in_order(self, tiny_dataset, tiny_architecture, short_config):
        rows = run_lambda_ablation(
            tiny_dataset, tiny_architecture, short_config, [(3.0, 1.0), (0.0, 1.0)], 5)

        assert [(row.lambda_ic, row.lambda_data) for row in rows] == [(3.0, 1.0), (0.0, 1.0)]
        for row in rows:
            assert row.min_val_loss is not None
            assert np.isfinite(row.test_rel_l2)

    def test_every_pair_starts_from_the_same_weights(
            self, tiny_dataset, tiny_architecture, short_config):
        rows = run_lambda_ablation(
            tiny_dataset, tiny_architecture, short_config, [(3.0, 1.0), (3.0, 1.0)], 5)

        assert rows[0] == rows[1]

    def test_if_both_weights_are_zero_raises_error(
            self, tiny_dataset, tiny_architecture, short_config):
        with pytest.raises(ValidationError):
            run_lambda_ablation(tiny_dataset, tiny_architecture, short_config, [(0.0, 0.0)], 5)


class TestWriteAblation:
    def test_writes_header_and_rows(self, tmp_path):
        rows = [AblationRow(3.0, 1.0, 0.02, 0.05, 3), AblationRow(1.0, 1.0, None, 0.04, 0)]

        path = write_ablation(rows, tmp_path)

        with open(path) as stream:
            lines = list(csv.reader(stream))
        assert lines[0] == ['lambda_ic', 'lambda_data', 'min_val_loss', 'test_rel_l2']
        assert lines[2][2] == 'nan'
        assert best_row(rows).lambda_ic == 1.0
