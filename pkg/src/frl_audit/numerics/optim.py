"""First-order optimizers acting on parameter dicts.

Both steps are pure: they return new arrays and a new state dict, leaving the
inputs untouched.
"""
from __future__ import annotations

import numpy as np


def _finite_or_raise(params):
    for key, value in params.items():
        if not np.all(np.isfinite(value)):
            raise FloatingPointError(f"non-finite update for parameter {key!r}")
    return params


def _congruent(params, grads):
    if params.keys() != grads.keys():
        raise ValueError("gradient keys do not match parameter keys")
    for key in params:
        if np.shape(params[key]) != np.shape(grads[key]):
            raise ValueError(f"gradient shape mismatch for {key!r}")


def sgd_step(params, grads, state=None, lr=0.01):
    _congruent(params, grads)
    new = {k: params[k] - lr * grads[k] for k in params}
    return _finite_or_raise(new), dict(state or {})


def adam_step(params, grads, state=None, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
    """Bias-corrected Adam update."""
    _congruent(params, grads)
    if not state:
        state = {"t": 0,
                 "m": {k: np.zeros_like(v) for k, v in params.items()},
                 "v": {k: np.zeros_like(v) for k, v in params.items()}}
    t = state["t"] + 1
    m, v = {}, {}
    new = {}
    c1 = 1.0 - beta1 ** t
    c2 = 1.0 - beta2 ** t
    for k in params:
        g = grads[k]
        m[k] = beta1 * state["m"][k] + (1.0 - beta1) * g
        v[k] = beta2 * state["v"][k] + (1.0 - beta2) * g * g
        new[k] = params[k] - lr * (m[k] / c1) / (np.sqrt(v[k] / c2) + eps)
    return _finite_or_raise(new), {"t": t, "m": m, "v": v}


OPTIMIZERS = {"sgd": sgd_step, "adam": adam_step}
