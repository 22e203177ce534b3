"""Differentiable substrate: autodiff, dense stacks, optimizers and MMD."""
from .autodiff import Tensor, bce_with_logits, concat, grl, kink_monitor, softmax, xlogy_ratio
from .kernels import median_bandwidth, rbf_mmd2
from .layers import (
    ACTIVATIONS,
    INJECTIVE,
    LayerSpec,
    NonFiniteLossError,
    ShapeError,
    count_parameters,
    copy_params,
    dense,
    forward,
    glorot_uniform,
    grad,
    grad_check,
    loss_value,
    random_stack,
    value_and_grad,
)
from .noise import NoiseTape
from .optim import OPTIMIZERS, adam_step, sgd_step

__all__ = [
    "ACTIVATIONS", "INJECTIVE", "LayerSpec", "NoiseTape", "NonFiniteLossError",
    "OPTIMIZERS", "ShapeError", "Tensor", "adam_step", "bce_with_logits", "concat",
    "copy_params", "count_parameters", "dense", "forward", "glorot_uniform", "grad",
    "grad_check", "grl", "kink_monitor", "loss_value", "median_bandwidth",
    "random_stack", "rbf_mmd2", "sgd_step", "softmax", "value_and_grad", "xlogy_ratio",
]
