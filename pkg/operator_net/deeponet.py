"""
Branch-trunk operator network for one phase.

    prediction(ic)(xi*, tau*) = sigmoid(sum_k a_k(ic) phi_k(xi*, tau*) + b0)

The branch (SiLU, Kaiming) reads the gas IC at the solver's cell centres,
the trunk (sine, SIREN) reads raw normalized coordinates. Each IC goes
through the branch once and each coordinate through the trunk once; the
field is their contraction.
"""
import logging
import os
from dataclasses import asdict, dataclass
from typing import List

import numpy as np
from django.core.exceptions import ValidationError

from adsorption.solver import PHASES, Field, Grid
from core import formats
from core.exceptions import ArtifactIOError
from operator_net.tensor_nn import (DenseLayer, init_kaiming, init_siren, mlp_backward,
                                    mlp_forward, open_unit_sigmoid)

logger = logging.getLogger(__name__)

COORD_DIM = 2
PREDICT_CHUNK = 64

MODEL_FILE = 'model.json'
WEIGHTS_FILE = 'weights.bin'
LAYER_ORDER = (
    'Flat vector: branch layers from input to latent, each weight (fan_out x fan_in, '
    'row-major) followed by its bias; then trunk layers in the same way; then the '
    'scalar output bias.')


@dataclass(frozen=True)
class Architecture:
    n_sensors: int = 100
    hidden_layers: int = 6
    width: int = 200
    latent: int = 100
    omega0: float = 20.0
    output_bias: bool = True

    @property
    def branch_dims(self):
        return [self.n_sensors] + [self.width] * self.hidden_layers + [self.latent]

    @property
    def trunk_dims(self):
        return [COORD_DIM] + [self.width] * self.hidden_layers + [self.latent]

    def as_dict(self):
        return asdict(self)


@dataclass
class DeepONetModel:
    """
    branch: dense layers mapping n_sensors IC values to the latent coefficients a_k.
    trunk: dense layers mapping (xi*, tau*) to the latent basis values phi_k.
    output_bias: trainable scalar b0 inside the sigmoid, held at zero when
    the architecture disables it.
    phase: which field the model predicts, 'gas' or 'solid'.
    """
    architecture: Architecture
    branch: List[DenseLayer]
    trunk: List[DenseLayer]
    output_bias: np.ndarray
    phase: str

    def __post_init__(self):
        if self.phase not in PHASES:
            raise ValidationError({'phase': f'Unknown phase {self.phase!r}.'})
        if self.branch[-1].fan_out != self.trunk[-1].fan_out:
            raise ValidationError('Branch and trunk latent widths differ.')

    @property
    def dtype(self):
        return self.branch[0].weight.dtype

    def parameters(self):
        params = []
        for layer in self.branch + self.trunk:
            params.extend([layer.weight, layer.bias])
        params.append(self.output_bias)
        return params

    def copy(self):
        return DeepONetModel(
            architecture=self.architecture,
            branch=[layer.copy() for layer in self.branch],
            trunk=[layer.copy() for layer in self.trunk],
            output_bias=self.output_bias.copy(),
            phase=self.phase,
        )


def build_model(architecture: Architecture, phase, rng, dtype=np.float64) -> DeepONetModel:
    return DeepONetModel(
        architecture=architecture,
        branch=init_kaiming(architecture.branch_dims, rng, dtype=dtype),
        trunk=init_siren(architecture.trunk_dims, architecture.omega0, rng, dtype=dtype),
        output_bias=np.zeros(1, dtype=dtype),
        phase=phase,
    )


def _check_ics(model, ics):
    ics = np.asarray(ics)
    if ics.ndim != 2 or ics.shape[1] != model.architecture.n_sensors:
        raise ValidationError(
            f'Initial conditions of shape {ics.shape} do not match '
            f'{model.architecture.n_sensors} sensors.')
    return ics


def _check_coords(coords):
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != COORD_DIM:
        raise ValidationError(f'Coordinates must have shape (n, 2), got {coords.shape}.')
    if not np.all(np.isfinite(coords)) or coords.min(initial=0.0) < 0.0 \
            or coords.max(initial=1.0) > 1.0:
        raise ValidationError({'coords': 'Query coordinates must lie in [0, 1] x [0, 1].'})
    return coords


@dataclass
class ContractionCache:
    branch: object
    trunk: object
    coefficients: np.ndarray
    basis: np.ndarray
    prediction: np.ndarray


def forward_with_cache(model: DeepONetModel, ics, coords):
    """Predictions of shape (n_ics, n_coords) and the cache for ``backward``."""
    ics = _check_ics(model, ics)
    coords = _check_coords(coords)
    coefficients, branch_cache = mlp_forward(model.branch, ics)
    basis, trunk_cache = mlp_forward(model.trunk, coords)
    logits = coefficients @ basis.T
    if model.architecture.output_bias:
        logits = logits + model.output_bias[0]
    prediction = open_unit_sigmoid(logits)
    return prediction, ContractionCache(
        branch_cache, trunk_cache, coefficients, basis, prediction)


def backward(model: DeepONetModel, cache: ContractionCache, grad_prediction):
    """Gradients in the order of ``model.parameters()``."""
    if cache is None:
        raise ValidationError('The backward pass needs the cache of a forward pass.')
    grad_logits = grad_prediction * cache.prediction * (1.0 - cache.prediction)
    branch_grads, _ = mlp_backward(model.branch, cache.branch, grad_logits @ cache.basis)
    trunk_grads, _ = mlp_backward(model.trunk, cache.trunk, grad_logits.T @ cache.coefficients)

    grads = []
    for weight_grad, bias_grad in branch_grads + trunk_grads:
        grads.extend([weight_grad, bias_grad])
    if model.architecture.output_bias:
        grads.append(np.array([grad_logits.sum()], dtype=model.dtype))
    else:
        grads.append(np.zeros(1, dtype=model.dtype))
    return grads


def forward(model: DeepONetModel, ic, coords):
    """
    Predicted values at ``coords`` for one IC (1-D input, 1-D output) or a
    batch of ICs (2-D input, one row per IC).
    """
    ic = np.asarray(ic)
    prediction, _ = forward_with_cache(model, np.atleast_2d(ic), coords)
    return prediction[0] if ic.ndim == 1 else prediction


def predict_fields(model: DeepONetModel, ics, grid: Grid):
    """(n_ics, n_x, n_t) predictions on the canonical grid, column 0 at tau* = 0."""
    ics = _check_ics(model, np.atleast_2d(ics))
    coords = grid.coordinates()
    basis, _ = mlp_forward(model.trunk, coords)
    bias = model.output_bias[0] if model.architecture.output_bias else 0.0
    fields = np.empty((ics.shape[0], grid.n_x, grid.n_t), dtype=model.dtype)
    for start in range(0, ics.shape[0], PREDICT_CHUNK):
        coefficients, _ = mlp_forward(model.branch, ics[start:start + PREDICT_CHUNK])
        logits = coefficients @ basis.T + bias
        fields[start:start + PREDICT_CHUNK] = \
            open_unit_sigmoid(logits).reshape(-1, grid.n_x, grid.n_t)
    return fields


def predict_field(model: DeepONetModel, ic, grid: Grid) -> Field:
    return Field(predict_fields(model, np.asarray(ic)[np.newaxis, :], grid)[0], model.phase)


def save_checkpoint(model: DeepONetModel, directory):
    os.makedirs(directory, exist_ok=True)
    metadata = {
        'architecture': model.architecture.as_dict(),
        'phase': model.phase,
        'omega0': model.architecture.omega0,
        'latent': model.architecture.latent,
        'output_bias': model.architecture.output_bias,
        'dtype': 'f32' if model.dtype == np.float32 else 'f64',
        'branch_activations': [layer.activation for layer in model.branch],
        'trunk_activations': [layer.activation for layer in model.trunk],
        'layer_order': LAYER_ORDER,
    }
    formats.write_json(os.path.join(directory, MODEL_FILE), metadata)
    flat = np.concatenate([p.ravel() for p in model.parameters()])
    formats.write_array(os.path.join(directory, WEIGHTS_FILE), flat)
    logger.info('Saved %s checkpoint to %s', model.phase, directory)


def load_checkpoint(directory) -> DeepONetModel:
    metadata_path = os.path.join(directory, MODEL_FILE)
    if not os.path.exists(metadata_path):
        raise ArtifactIOError(f'No checkpoint found in {directory}.')
    metadata = formats.read_json(metadata_path)
    flat = formats.read_array(os.path.join(directory, WEIGHTS_FILE))

    architecture = Architecture(**metadata['architecture'])
    model = build_model(
        architecture, metadata['phase'], np.random.default_rng(0), dtype=flat.dtype)
    params = model.parameters()
    expected = sum(p.size for p in params)
    if flat.size != expected:
        raise ArtifactIOError(
            f'{directory} holds {flat.size} weights, the architecture needs {expected}.')
    offset = 0
    for p in params:
        p[...] = flat[offset:offset + p.size].reshape(p.shape)
        offset += p.size
    return model
