"""
Loss-weight study: one training run per (lambda_ic, lambda_data) pair, all
from the same initial weights, scored by validation loss and test error.
"""
import logging
import os
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np
from django.core.exceptions import ValidationError

from core import formats
from operator_net.deeponet import Architecture, build_model
from operator_net.metrics import ModelPredictor, evaluate
from operator_net.trainer import TrainConfig, train

logger = logging.getLogger(__name__)

ABLATION_FILE = 'lambda_ablation.csv'
SCORE_SPLIT = 'test'


@dataclass
class AblationRow:
    lambda_ic: float
    lambda_data: float
    min_val_loss: Optional[float]
    test_rel_l2: float
    best_epoch: int


def parse_pairs(value) -> List[Tuple[float, float]]:
    """``'3:1,1:1'`` -> [(3.0, 1.0), (1.0, 1.0)]."""
    pairs = []
    for item in value.split(','):
        if not item.strip():
            continue
        try:
            lambda_ic, lambda_data = (float(part) for part in item.split(':'))
        except ValueError as exc:
            raise ValidationError(
                {'pairs': f'Expected lambda_ic:lambda_data items, got {item!r}.'}) from exc
        pairs.append((lambda_ic, lambda_data))
    if not pairs:
        raise ValidationError({'pairs': 'At least one weight pair is required.'})
    return pairs


def run_lambda_ablation(dataset, architecture: Architecture, config: TrainConfig,
                        pairs: Sequence[Tuple[float, float]], init_seed,
                        dtype=np.float64) -> List[AblationRow]:
    rows = []
    for lambda_ic, lambda_data in pairs:
        run_config = replace(config, lambda_ic=lambda_ic, lambda_data=lambda_data)
        model = build_model(architecture, config.phase, np.random.default_rng(init_seed),
                            dtype=dtype)
        best, report = train(model, dataset, run_config)
        score = evaluate({config.phase: ModelPredictor(best)}, dataset, SCORE_SPLIT)
        row = AblationRow(
            lambda_ic=lambda_ic,
            lambda_data=lambda_data,
            min_val_loss=report.min_val_loss,
            test_rel_l2=score.mean(config.phase),
            best_epoch=report.best_epoch,
        )
        logger.info('lambda_ic=%g lambda_data=%g: val %s, test %.4f%%',
                    lambda_ic, lambda_data, row.min_val_loss, 100.0 * row.test_rel_l2)
        rows.append(row)
    return rows


def best_row(rows: Sequence[AblationRow]) -> AblationRow:
    return min(rows, key=lambda row: row.test_rel_l2)


def write_ablation(rows: Sequence[AblationRow], directory):
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, ABLATION_FILE)
    formats.write_csv(
        path,
        ['lambda_ic', 'lambda_data', 'min_val_loss', 'test_rel_l2'],
        ([repr(row.lambda_ic), repr(row.lambda_data),
          'nan' if row.min_val_loss is None else repr(row.min_val_loss),
          repr(row.test_rel_l2)] for row in rows))
    return path
