"""
Relative L2 errors of predicted fields and the evaluation report over a
dataset split.

Norms are plain double sums over the M_x x M_t grid, without quadrature
weights.
"""
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from django.conf import settings
from django.core.exceptions import ValidationError

from adsorption.solver import GAS, PHASES, SOLID, Field
from core import formats
from core.exceptions import DegenerateNormError
from operator_net.deeponet import DeepONetModel, predict_fields

logger = logging.getLogger(__name__)

REPORT_FILE = 'eval.json'
SAMPLES_FILE = 'per_sample.csv'
WORST_COUNT = 5


def _values(field_or_array):
    if isinstance(field_or_array, Field):
        return field_or_array.values
    return np.asarray(field_or_array, dtype=np.float64)


def relative_l2(pred, truth):
    """||pred - truth|| / ||truth|| for single fields or stacks over the last two axes."""
    pred, truth = _values(pred), _values(truth)
    if pred.shape != truth.shape:
        raise ValidationError(f'Prediction {pred.shape} and truth {truth.shape} differ.')
    axes = (-2, -1) if truth.ndim >= 2 else None
    denominator = np.sqrt(np.sum(np.square(truth, dtype=np.float64), axis=axes))
    if np.any(denominator == 0.0):
        raise DegenerateNormError('Relative error is undefined for a zero-norm reference field.')
    numerator = np.sqrt(np.sum(np.square(pred - truth, dtype=np.float64), axis=axes))
    result = numerator / denominator
    return float(result) if np.ndim(result) == 0 else result


class ModelPredictor:
    def __init__(self, model: DeepONetModel):
        self.model = model
        self.phase = model.phase
        self.label = f'deeponet:{model.phase}'

    def __call__(self, split, grid):
        return predict_fields(self.model, split.ics, grid).astype(np.float64)


class OraclePredictor:
    """Replays the stored solver fields as the prediction."""

    def __init__(self, phase):
        if phase not in PHASES:
            raise ValidationError({'phase': f'Unknown phase {phase!r}.'})
        self.phase = phase
        self.label = f'oracle:{phase}'

    def __call__(self, split, grid):
        return getattr(split, self.phase).astype(np.float64)


@dataclass
class PhaseSummary:
    mean: float
    worst_indices: List[int]
    per_family: Dict[str, float]


@dataclass
class EvalReport:
    split: str
    indices: np.ndarray
    families: np.ndarray
    errors: Dict[str, np.ndarray]
    max_abs_err: Dict[str, np.ndarray]
    summaries: Dict[str, PhaseSummary]
    predictors: Dict[str, str]
    reference: dict = field(default_factory=dict)

    @property
    def phases(self):
        return [phase for phase in PHASES if phase in self.errors]

    def mean(self, phase=GAS):
        return self.summaries[phase].mean

    def sample_max_abs_err(self):
        return np.max(np.stack([self.max_abs_err[phase] for phase in self.phases]), axis=0)


def _summarize(errors, families, indices):
    per_family = {
        family: float(np.mean(errors[families == family]))
        for family in sorted(set(families.tolist()))
    }
    worst = np.argsort(-errors, kind='stable')[:WORST_COUNT]
    return PhaseSummary(
        mean=float(np.mean(errors)),
        worst_indices=[int(indices[i]) for i in worst],
        per_family=per_family,
    )


def reference_metrics(dataset_kind):
    reference = dict(settings.SURROGATE['REFERENCE_METRICS'])
    if dataset_kind == 'ood':
        return {key: value for key, value in reference.items() if key.startswith('ood')}
    return {key: value for key, value in reference.items() if key.startswith('test')}


def evaluate(predictors, dataset, split) -> EvalReport:
    """
    predictors: {phase: callable(split_view, grid) -> (n, n_x, n_t) fields},
    usually ModelPredictor or OraclePredictor; at least one phase is needed.
    """
    if not predictors:
        raise ValidationError('At least one predictor is required.')
    view = dataset.split_view(split)
    if len(view) == 0:
        raise ValidationError({'split': f'Split {split!r} is empty.'})

    errors, max_abs, summaries, labels = {}, {}, {}, {}
    for phase in PHASES:
        predictor = predictors.get(phase)
        if predictor is None:
            continue
        if getattr(predictor, 'phase', phase) != phase:
            raise ValidationError({'phase': f'Predictor for {predictor.phase} passed as {phase}.'})
        model = getattr(predictor, 'model', None)
        if model is not None and model.architecture.n_sensors != dataset.grid.n_x:
            raise ValidationError('Model sensors do not match the dataset grid.')
        truth = getattr(view, phase)
        prediction = predictor(view, dataset.grid)
        errors[phase] = relative_l2(prediction, truth)
        max_abs[phase] = np.max(np.abs(prediction - truth), axis=(1, 2))
        summaries[phase] = _summarize(errors[phase], view.families, view.indices)
        labels[phase] = getattr(predictor, 'label', type(predictor).__name__)
        logger.info('%s on %s: mean relative L2 %.4f%% over %d samples',
                    labels[phase], split, 100.0 * summaries[phase].mean, len(view))

    return EvalReport(
        split=split,
        indices=view.indices,
        families=view.families,
        errors=errors,
        max_abs_err=max_abs,
        summaries=summaries,
        predictors=labels,
        reference=reference_metrics(dataset.kind),
    )


def write_report(report: EvalReport, directory, extra: Optional[dict] = None):
    from operator_net.serializers import EvalReportSerializer

    os.makedirs(directory, exist_ok=True)
    payload = EvalReportSerializer(report).data
    if extra:
        payload.update(extra)
    formats.write_json(os.path.join(directory, REPORT_FILE), payload)

    nan = float('nan')
    gas = report.errors.get(GAS)
    solid = report.errors.get(SOLID)
    max_abs = report.sample_max_abs_err()
    formats.write_csv(
        os.path.join(directory, SAMPLES_FILE),
        ['index', 'family', 'r_gas', 'r_solid', 'max_abs_err'],
        ([int(index), family,
          repr(float(gas[i])) if gas is not None else repr(nan),
          repr(float(solid[i])) if solid is not None else repr(nan),
          repr(float(max_abs[i]))]
         for i, (index, family) in enumerate(zip(report.indices, report.families))))
