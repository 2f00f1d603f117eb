"""
Dense-network substrate in numpy: layers, activations, initializers, a
closed-form backward pass for chains of dense layers and the Adam optimizer.

Batches are row-major: an input of shape (batch, fan_in) maps to
(batch, fan_out) through ``x @ W.T + b`` with W of shape (fan_out, fan_in).
"""
import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np
from django.core.exceptions import ValidationError

from core.exceptions import NonFiniteGradientError

logger = logging.getLogger(__name__)

SILU = 'silu'
SINE = 'sine'
IDENTITY = 'identity'
SIGMOID = 'sigmoid'
ACTIVATIONS = (SILU, SINE, IDENTITY, SIGMOID)


def sigmoid(z):
    z = np.asarray(z)
    out = np.empty_like(z)
    positive = z >= 0
    out[positive] = 1.0 / (1.0 + np.exp(-z[positive]))
    exp_z = np.exp(z[~positive])
    out[~positive] = exp_z / (1.0 + exp_z)
    return out


def open_unit_sigmoid(z):
    """Sigmoid kept strictly inside (0, 1) at the precision of ``z``."""
    out = sigmoid(z)
    limits = np.finfo(out.dtype)
    upper = out.dtype.type(1.0) - limits.epsneg
    return np.clip(out, limits.tiny, upper)


@dataclass
class DenseLayer:
    """
    weight: fan_out x fan_in matrix.
    bias: fan_out vector.
    activation: one of silu, sine, identity, sigmoid.
    omega0: frequency of sine layers, sin(omega0 * (W x + b)).
    """
    weight: np.ndarray
    bias: np.ndarray
    activation: str = IDENTITY
    omega0: float = 1.0

    def __post_init__(self):
        if self.activation not in ACTIVATIONS:
            raise ValidationError({'activation': f'Unknown activation {self.activation!r}.'})
        if self.activation == SINE and not self.omega0 > 0:
            raise ValidationError({'omega0': 'omega0 must be positive for sine layers.'})
        if self.weight.ndim != 2 or self.bias.shape != (self.weight.shape[0],):
            raise ValidationError(
                f'Weight {self.weight.shape} and bias {self.bias.shape} do not form a layer.')

    @property
    def fan_in(self):
        return self.weight.shape[1]

    @property
    def fan_out(self):
        return self.weight.shape[0]

    def copy(self):
        return DenseLayer(self.weight.copy(), self.bias.copy(), self.activation, self.omega0)


def activate(z, layer: DenseLayer):
    if layer.activation == SILU:
        return z * sigmoid(z)
    if layer.activation == SINE:
        return np.sin(layer.omega0 * z)
    if layer.activation == SIGMOID:
        return sigmoid(z)
    return z


def activation_derivative(z, a, layer: DenseLayer):
    """d activation / dz, reusing the forward output ``a`` where it helps."""
    if layer.activation == SILU:
        s = sigmoid(z)
        return s * (1.0 + z * (1.0 - s))
    if layer.activation == SINE:
        return layer.omega0 * np.cos(layer.omega0 * z)
    if layer.activation == SIGMOID:
        return a * (1.0 - a)
    return np.ones_like(z)


@dataclass
class ForwardCache:
    inputs: List[np.ndarray] = field(default_factory=list)
    preactivations: List[np.ndarray] = field(default_factory=list)
    outputs: List[np.ndarray] = field(default_factory=list)


def check_stack(layers):
    if not layers:
        raise ValidationError('A network needs at least one layer.')
    for previous, current in zip(layers, layers[1:]):
        if previous.fan_out != current.fan_in:
            raise ValidationError(
                f'Layer of width {previous.fan_out} cannot feed a layer expecting {current.fan_in}.')


def mlp_forward(layers, x):
    """Returns (output, cache); the cache is what ``mlp_backward`` needs."""
    check_stack(layers)
    x = np.asarray(x, dtype=layers[0].weight.dtype)
    if x.ndim != 2 or x.shape[1] != layers[0].fan_in:
        raise ValidationError(
            f'Input of shape {x.shape} does not match fan_in {layers[0].fan_in}.')

    cache = ForwardCache()
    for layer in layers:
        z = x @ layer.weight.T + layer.bias
        a = activate(z, layer)
        cache.inputs.append(x)
        cache.preactivations.append(z)
        cache.outputs.append(a)
        x = a
    return x, cache


def mlp_backward(layers, cache, grad_output):
    """
    Reverse pass through the dense chain.
    Returns ([(dW, db) per layer], d input).
    """
    if cache is None or len(cache.inputs) != len(layers):
        raise ValidationError('The backward pass needs the cache of a forward pass.')

    grads = [None] * len(layers)
    upstream = grad_output
    for i in reversed(range(len(layers))):
        layer = layers[i]
        dz = upstream * activation_derivative(
            cache.preactivations[i], cache.outputs[i], layer)
        grads[i] = (dz.T @ cache.inputs[i], dz.sum(axis=0))
        upstream = dz @ layer.weight
    return grads, upstream


def mse(prediction, target):
    return float(np.mean((prediction - target) ** 2))


def mse_gradient(prediction, target):
    return 2.0 * (prediction - target) / prediction.size


def _layer(fan_in, fan_out, weight, activation, omega0, dtype):
    return DenseLayer(
        weight=weight.astype(dtype),
        bias=np.zeros(fan_out, dtype=dtype),
        activation=activation,
        omega0=omega0,
    )


def init_siren(dims, omega0, rng, dtype=np.float64, final_activation=IDENTITY):
    """
    Sine layers for every hidden layer. The first layer draws from
    U(-1/fan_in, 1/fan_in), later layers from U(-sqrt(6/fan_in)/omega0, +...).
    Biases start at zero.
    """
    if len(dims) < 2:
        raise ValidationError('init_siren needs at least input and output widths.')
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(dims, dims[1:])):
        bound = 1.0 / fan_in if i == 0 else np.sqrt(6.0 / fan_in) / omega0
        weight = rng.uniform(-bound, bound, size=(fan_out, fan_in))
        activation = final_activation if i == len(dims) - 2 else SINE
        layers.append(_layer(fan_in, fan_out, weight, activation, omega0, dtype))
    return layers


def init_kaiming(dims, rng, dtype=np.float64, activation=SILU, final_activation=IDENTITY):
    """Weights ~ N(0, 2/fan_in), zero biases."""
    if len(dims) < 2:
        raise ValidationError('init_kaiming needs at least input and output widths.')
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(dims, dims[1:])):
        weight = rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_out, fan_in))
        layer_activation = final_activation if i == len(dims) - 2 else activation
        layers.append(_layer(fan_in, fan_out, weight, layer_activation, 1.0, dtype))
    return layers


@dataclass
class AdamState:
    """
    m, v: first and second moment accumulators, one per parameter array.
    step: number of updates applied so far.
    """
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: List[np.ndarray] = field(default_factory=list)
    v: List[np.ndarray] = field(default_factory=list)

    @classmethod
    def for_params(cls, params, **hyperparameters):
        return cls(
            m=[np.zeros_like(p) for p in params],
            v=[np.zeros_like(p) for p in params],
            **hyperparameters,
        )


def adam_step(params, grads, state: AdamState, lr=None):
    """
    One bias-corrected Adam update, in place, without weight decay.
    Non-finite gradients abort before any state is touched.
    """
    if len(params) != len(grads) or len(params) != len(state.m):
        raise ValidationError('Parameters, gradients and optimizer state do not line up.')
    for index, (p, g) in enumerate(zip(params, grads)):
        if p.shape != g.shape:
            raise ValidationError(
                f'Gradient {index} has shape {g.shape}, parameter has {p.shape}.')
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradientError(f'Gradient {index} contains non-finite values.')

    lr = state.lr if lr is None else lr
    state.step += 1
    correction1 = 1.0 - state.beta1 ** state.step
    correction2 = 1.0 - state.beta2 ** state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= (lr / correction1) * m / (np.sqrt(v / correction2) + state.eps)
    return params, state
