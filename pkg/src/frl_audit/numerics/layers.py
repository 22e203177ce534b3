"""Dense layer stacks, parameter sets and gradient plumbing."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .autodiff import Tensor, sigmoid_array

ACTIVATIONS = ("tanh", "sigmoid", "relu", "identity")
INJECTIVE = ("tanh", "sigmoid", "identity")


class ShapeError(ValueError):
    pass


class NonFiniteLossError(FloatingPointError):
    """Raised when a loss or one of its named terms is not finite."""

    def __init__(self, term, value):
        super().__init__(f"non-finite loss term {term!r}: {value}")
        self.term = term
        self.value = value


def glorot_uniform(rng, fan_in, fan_out):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


def activate(x, name):
    """Apply activation ``name`` to a Tensor or ndarray."""
    if isinstance(x, Tensor):
        if name == "tanh":
            return x.tanh()
        if name == "sigmoid":
            return x.sigmoid()
        if name == "relu":
            return x.relu()
        if name == "identity":
            return x
    else:
        if name == "tanh":
            return np.tanh(x)
        if name == "sigmoid":
            return sigmoid_array(x)
        if name == "relu":
            return np.maximum(x, 0.0)
        if name == "identity":
            return np.asarray(x, dtype=np.float64)
    raise ValueError(f"unknown activation {name!r}")


@dataclass
class LayerSpec:
    """One dense layer ``sigma(A @ h + b)``; ``weights`` is out x in."""

    weights: np.ndarray
    bias: np.ndarray
    activation: str = "tanh"

    def __post_init__(self):
        self.weights = np.atleast_2d(np.asarray(self.weights, dtype=np.float64))
        self.bias = np.asarray(self.bias, dtype=np.float64).reshape(-1)
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")
        if self.bias.shape[0] != self.weights.shape[0]:
            raise ShapeError("bias length must equal the layer's output width")
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ValueError("layer parameters must be finite")

    @property
    def in_width(self):
        return self.weights.shape[1]

    @property
    def out_width(self):
        return self.weights.shape[0]

    @classmethod
    def random(cls, rng, in_width, out_width, activation="tanh"):
        if in_width <= 0 or out_width <= 0:
            raise ValueError("layer widths must be positive")
        return cls(glorot_uniform(rng, in_width, out_width), np.zeros(out_width), activation)


def random_stack(rng, widths, activation="tanh"):
    """Layers mapping ``widths[0] -> widths[1] -> ... -> widths[-1]``."""
    return [LayerSpec.random(rng, a, b, activation) for a, b in zip(widths[:-1], widths[1:])]


def forward(stack, x):
    """Return the activations ``[Z^1, ..., Z^L]`` of ``stack`` applied to batch ``x``."""
    h = np.asarray(x, dtype=np.float64)
    if h.ndim == 1:
        h = h[:, None]
    outputs = []
    for i, layer in enumerate(stack):
        if h.shape[1] != layer.in_width:
            raise ShapeError(
                f"layer {i} expects {layer.in_width} inputs, got {h.shape[1]}")
        h = activate(h @ layer.weights.T + layer.bias, layer.activation)
        outputs.append(h)
    return outputs


def dense(h, W, b, activation="identity"):
    """Tensor version of a single layer; ``W`` is out x in."""
    return activate(h @ W.T + b, activation)


# parameter sets -------------------------------------------------------------

def count_parameters(params):
    return sum(int(np.size(v)) for v in params.values())


def copy_params(params):
    return {k: np.array(v, dtype=np.float64, copy=True) for k, v in params.items()}


def _unpack(out):
    if isinstance(out, tuple):
        total, terms = out
    else:
        total, terms = out, {}
    return total, terms


def _check_finite(total, terms):
    for name, term in terms.items():
        value = term.data if isinstance(term, Tensor) else np.asarray(term)
        if not np.all(np.isfinite(value)):
            raise NonFiniteLossError(name, float(np.asarray(value).ravel()[0]))
    value = total.data if isinstance(total, Tensor) else np.asarray(total)
    if not np.all(np.isfinite(value)):
        raise NonFiniteLossError("total", float(np.asarray(value).ravel()[0]))


def value_and_grad(loss, params):
    """Evaluate ``loss(tensors)`` and its gradient with respect to every parameter.

    ``loss`` receives a dict of Tensors keyed like ``params`` and returns either
    a scalar Tensor or ``(total, {term_name: Tensor})``. Returns
    ``(total_value, {term_name: value}, gradients)``.
    """
    leaves = {k: Tensor(v) for k, v in params.items()}
    total, terms = _unpack(loss(leaves))
    total = total if isinstance(total, Tensor) else Tensor(total)
    _check_finite(total, terms)
    total.backward()
    grads = {}
    for k, leaf in leaves.items():
        grads[k] = np.zeros_like(leaf.data) if leaf.grad is None else np.asarray(leaf.grad)
    values = {name: float(np.asarray(t.data if isinstance(t, Tensor) else t)) for name, t in terms.items()}
    return float(total.data), values, grads


def grad(loss, params):
    return value_and_grad(loss, params)[2]


def loss_value(loss, params):
    leaves = {k: Tensor(v) for k, v in params.items()}
    total, _ = _unpack(loss(leaves))
    return float(total.data if isinstance(total, Tensor) else total)


def grad_check(loss, params, step=1e-5, reference=None):
    """Max relative error between the analytic gradient and central differences.

    The relative error of one entry is
    ``|a - c| / (|a| + |c| + 1e-12)``. Differences are taken on ``reference``
    when given; it must be a scalar function whose true gradient at ``params``
    is what ``loss``'s backward pass claims (needed where gradient reversal
    makes the backward pass differ from the derivative of the forward value).
    """
    if step <= 0:
        raise ValueError("step must be positive")
    analytic = grad(loss, params)
    reference = loss if reference is None else reference
    worst = 0.0
    work = copy_params(params)
    for key, value in params.items():
        flat = work[key].reshape(-1)
        g = analytic[key].reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + step
            up = loss_value(reference, work)
            flat[i] = orig - step
            down = loss_value(reference, work)
            flat[i] = orig
            numeric = (up - down) / (2.0 * step)
            err = abs(g[i] - numeric) / (abs(g[i]) + abs(numeric) + 1e-12)
            if err > worst:
                worst = err
    return worst
