"""
Supervised training of one DeepONetModel.

The loss is lambda_ic * L_ic + lambda_data * L_data, where L_data is the MSE
over the whole predicted field and L_ic the MSE of its tau* = 0 column
against the gas IC (the solid IC equals it under local equilibrium).
Minibatches hold whole ICs with the full coordinate grid; an epoch is one
pass over the training ICs.
"""
import logging
import math
import os
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np
from django.core.exceptions import ValidationError

from adsorption.solver import GAS, PHASES, Grid
from core import formats
from core.exceptions import NonFiniteGradientError, TrainingDiverged
from operator_net import signals
from operator_net.deeponet import DeepONetModel, backward, forward_with_cache
from operator_net.tensor_nn import AdamState, adam_step, mse, mse_gradient

logger = logging.getLogger(__name__)

REPORT_FILE = 'report.json'
HISTORY_FILE = 'history.csv'


@dataclass
class TrainConfig:
    lambda_ic: float = 3.0
    lambda_data: float = 1.0
    lr: float = 1e-4
    min_lr: float = 1e-7
    max_epochs: int = 500000
    val_every: int = 100
    early_stop_patience: int = 10000
    scheduler_factor: float = 0.5
    scheduler_patience: int = 2000
    scheduler_threshold: float = 1e-6
    batch_size: int = 64
    seed: int = 0
    phase: str = GAS
    stop_at: Optional[int] = None

    def __post_init__(self):
        errors = {}
        if self.lambda_ic < 0 or self.lambda_data < 0:
            errors['lambda_ic'] = 'Loss weights must be non-negative.'
        elif self.lambda_ic == 0 and self.lambda_data == 0:
            errors['lambda_ic'] = 'lambda_ic and lambda_data cannot both be zero.'
        if self.val_every < 1 or self.early_stop_patience % self.val_every:
            errors['val_every'] = 'val_every must be positive and divide early_stop_patience.'
        if not 0 < self.min_lr <= self.lr:
            errors['min_lr'] = 'min_lr must be positive and not exceed lr.'
        if not 0 < self.scheduler_factor < 1:
            errors['scheduler_factor'] = 'scheduler_factor must lie in (0, 1).'
        if self.batch_size < 1:
            errors['batch_size'] = 'batch_size must be positive.'
        if self.max_epochs < 0:
            errors['max_epochs'] = 'max_epochs cannot be negative.'
        if self.phase not in PHASES:
            errors['phase'] = f'Unknown phase {self.phase!r}.'
        if errors:
            raise ValidationError(errors)

    @property
    def last_epoch(self):
        if self.stop_at is None:
            return self.max_epochs
        return min(self.max_epochs, self.stop_at)


@dataclass
class Batch:
    """
    ics: (n, n_x) gas ICs, the branch input and the L_ic target.
    targets: (n, n_x, n_t) reference fields of the model's phase.
    """
    ics: np.ndarray
    targets: np.ndarray


@dataclass
class LossTerms:
    ic: float
    data: float
    total: float


def _loss_and_output_gradient(prediction, batch, lambda_ic, lambda_data):
    if prediction.shape != batch.targets.shape:
        raise ValidationError(
            f'Prediction {prediction.shape} and targets {batch.targets.shape} differ.')
    if batch.ics.shape != prediction.shape[:2]:
        raise ValidationError(
            f'IC targets {batch.ics.shape} do not match fields {prediction.shape}.')

    ic_prediction = prediction[:, :, 0]
    data_loss = mse(prediction, batch.targets)
    ic_loss = mse(ic_prediction, batch.ics)
    terms = LossTerms(
        ic=ic_loss,
        data=data_loss,
        total=lambda_ic * ic_loss + lambda_data * data_loss,
    )

    grad = lambda_data * mse_gradient(prediction, batch.targets)
    grad[:, :, 0] += lambda_ic * mse_gradient(ic_prediction, batch.ics)
    return terms, grad


def _predict(model, batch, grid):
    prediction, cache = forward_with_cache(model, batch.ics, grid.coordinates())
    return prediction.reshape(len(batch.ics), grid.n_x, grid.n_t), cache


def loss_terms(model: DeepONetModel, batch: Batch, grid: Grid,
               lambda_ic=3.0, lambda_data=1.0) -> LossTerms:
    prediction, _ = _predict(model, batch, grid)
    terms, _ = _loss_and_output_gradient(prediction, batch, lambda_ic, lambda_data)
    return terms


def loss_and_gradients(model: DeepONetModel, batch: Batch, grid: Grid,
                       lambda_ic=3.0, lambda_data=1.0):
    prediction, cache = _predict(model, batch, grid)
    terms, grad = _loss_and_output_gradient(prediction, batch, lambda_ic, lambda_data)
    return terms, backward(model, cache, grad.reshape(len(batch.ics), -1))


def split_loss(model, ics, targets, grid, config: TrainConfig) -> LossTerms:
    """Loss over a whole split, evaluated in chunks of ``batch_size`` ICs."""
    sums = np.zeros(3)
    for start in range(0, len(ics), config.batch_size):
        batch = Batch(ics[start:start + config.batch_size],
                      targets[start:start + config.batch_size])
        terms = loss_terms(model, batch, grid, config.lambda_ic, config.lambda_data)
        sums += len(batch.ics) * np.array([terms.ic, terms.data, terms.total])
    ic, data, total = sums / len(ics)
    return LossTerms(ic=float(ic), data=float(data), total=float(total))


class PlateauScheduler:
    """Multiplies the learning rate by ``factor`` after ``patience`` epochs without relative improvement."""

    def __init__(self, lr, factor, patience, threshold, min_lr):
        self.lr = lr
        self.factor = factor
        self.patience = patience
        self.threshold = threshold
        self.min_lr = min_lr
        self.best = math.inf
        self.bad_epochs = 0

    def step(self, loss):
        if loss < self.best * (1.0 - self.threshold):
            self.best = loss
            self.bad_epochs = 0
            return False
        self.bad_epochs += 1
        if self.bad_epochs <= self.patience:
            return False
        self.bad_epochs = 0
        reduced = max(self.lr * self.factor, self.min_lr)
        if reduced < self.lr:
            self.lr = reduced
            return True
        return False


@dataclass
class HistoryRow:
    epoch: int
    train_loss: float
    val_loss: float
    lr: float
    train_ic_loss: float
    train_data_loss: float


@dataclass
class TrainReport:
    """
    Mirrors the training summary: wall time, best epoch and the smallest
    training, validation, data and IC losses, plus the periodic history.
    """
    phase: str
    wall_time_s: float = 0.0
    best_epoch: int = 0
    epochs_run: int = 0
    stopped_reason: str = 'max_epochs'
    min_train_loss: Optional[float] = None
    min_val_loss: Optional[float] = None
    min_data_loss: Optional[float] = None
    min_ic_loss: Optional[float] = None
    history: List[HistoryRow] = field(default_factory=list)


def _minimum(current, value):
    return value if current is None else min(current, value)


def train(model: DeepONetModel, dataset, config: TrainConfig):
    """Returns (best model, TrainReport); the best model has the lowest validation loss seen."""
    if model.phase != config.phase:
        raise ValidationError({'phase': f'Model predicts {model.phase}, config trains {config.phase}.'})
    grid = dataset.grid
    train_split = dataset.split_view('train')
    val_split = dataset.split_view('val')
    if len(train_split) == 0 or len(val_split) == 0:
        raise ValidationError('Training needs non-empty train and val splits.')
    train_targets = getattr(train_split, config.phase)
    val_targets = getattr(val_split, config.phase)

    rng = np.random.default_rng(config.seed)
    params = model.parameters()
    state = AdamState.for_params(params, lr=config.lr)
    scheduler = PlateauScheduler(
        config.lr, config.scheduler_factor, config.scheduler_patience,
        config.scheduler_threshold, config.min_lr)
    report = TrainReport(phase=config.phase)
    best_model, best_val = model.copy(), math.inf
    started = time.perf_counter()

    epoch = 0
    for epoch in range(1, config.last_epoch + 1):
        order = rng.permutation(len(train_split))
        sums = np.zeros(3)
        for start in range(0, len(order), config.batch_size):
            rows = order[start:start + config.batch_size]
            batch = Batch(train_split.ics[rows], train_targets[rows])
            terms, grads = loss_and_gradients(
                model, batch, grid, config.lambda_ic, config.lambda_data)
            if not math.isfinite(terms.total):
                raise TrainingDiverged(epoch, best_model)
            try:
                adam_step(params, grads, state, lr=scheduler.lr)
            except NonFiniteGradientError as exc:
                raise TrainingDiverged(epoch, best_model) from exc
            sums += len(rows) * np.array([terms.ic, terms.data, terms.total])

        train_ic, train_data, train_total = sums / len(order)
        report.min_train_loss = _minimum(report.min_train_loss, float(train_total))
        report.min_ic_loss = _minimum(report.min_ic_loss, float(train_ic))
        report.min_data_loss = _minimum(report.min_data_loss, float(train_data))
        if scheduler.step(train_total):
            signals.learning_rate_reduced.send_robust(train, lr=scheduler.lr, epoch=epoch)

        if epoch % config.val_every and epoch != config.last_epoch:
            continue
        val = split_loss(model, val_split.ics, val_targets, grid, config)
        report.history.append(HistoryRow(
            epoch=epoch,
            train_loss=float(train_total),
            val_loss=val.total,
            lr=scheduler.lr,
            train_ic_loss=float(train_ic),
            train_data_loss=float(train_data),
        ))
        logger.info('epoch %d: train %.6e val %.6e lr %.2e',
                    epoch, train_total, val.total, scheduler.lr)
        if val.total < best_val:
            best_val, best_model = val.total, model.copy()
            report.best_epoch = epoch
            report.min_val_loss = val.total
            signals.validation_improved.send_robust(
                train, phase=config.phase, epoch=epoch, val_loss=val.total)
        elif epoch - report.best_epoch >= config.early_stop_patience:
            report.stopped_reason = 'early_stop'
            break
    else:
        if config.stop_at is not None and config.stop_at < config.max_epochs:
            report.stopped_reason = 'stop_at'

    report.epochs_run = epoch
    report.wall_time_s = time.perf_counter() - started
    signals.training_finished.send_robust(train, report=report)
    return best_model, report


def write_report(report: TrainReport, directory):
    from operator_net.serializers import TrainReportSerializer

    os.makedirs(directory, exist_ok=True)
    formats.write_json(
        os.path.join(directory, REPORT_FILE), TrainReportSerializer(report).data)
    formats.write_csv(
        os.path.join(directory, HISTORY_FILE),
        ['epoch', 'train_loss', 'val_loss', 'lr'],
        ([row.epoch, repr(row.train_loss), repr(row.val_loss), repr(row.lr)]
         for row in report.history))


