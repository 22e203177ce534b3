"""Fitting, scoring, representation extraction and JSON checkpoints."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..numerics import OPTIMIZERS, NonFiniteLossError, Tensor, value_and_grad
from .families import build, new_tape
from .spec import ModelSpec, TrainedModel


class TrainingDivergence(FloatingPointError):
    def __init__(self, epoch, term, value):
        super().__init__(f"training diverged at epoch {epoch}: term {term!r} = {value}")
        self.epoch = epoch
        self.term = term


def _arrays(data):
    return (np.asarray(data.features, dtype=np.float64),
            np.asarray(data.labels, dtype=np.float64),
            np.asarray(data.sensitive, dtype=np.int64))


def fit(spec, train, gamma):
    """Minimise ``(1 - gamma) L_class + gamma L_fair`` with mini-batch updates.

    Deterministic given ``spec.seed``: the same spec, data and gamma give
    bit-identical parameters and loss trace.
    """
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    X, y, s = _arrays(train)
    n = X.shape[0]
    if n == 0:
        raise ValueError("empty training set")
    family = build(spec)
    rng = np.random.default_rng([int(spec.seed), 0x1f1])
    params = family.init(spec, X, rng)
    tape = new_tape(spec.seed)
    step = OPTIMIZERS[spec.optimizer]
    state = None
    trace = []
    for epoch in range(spec.epochs):
        order = rng.permutation(n)
        sums = np.zeros(2)
        batches = 0
        for start in range(0, n, spec.batch_size):
            idx = order[start:start + spec.batch_size]
            Xb, yb, sb = X[idx], y[idx], s[idx]
            try:
                _, terms, grads = value_and_grad(
                    lambda t: family.loss(t, Xb, yb, sb, gamma, tape), params)
            except NonFiniteLossError as exc:
                raise TrainingDivergence(epoch, exc.term, exc.value) from exc
            try:
                params, state = step(params, grads, state, lr=spec.lr)
            except FloatingPointError as exc:
                raise TrainingDivergence(epoch, "update", str(exc)) from exc
            sums += (terms["class"], terms["fair"])
            batches += 1
        trace.append((float(sums[0] / batches), float(sums[1] / batches)))
    return TrainedModel(spec, params, float(gamma), X.shape[1], trace)


def _check_width(model, X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ValueError(f"expected {model.n_features} feature columns, got shape {X.shape}")
    return X


def predict_scores(model, X, s=None):
    """Sigmoid task-head outputs in (0, 1)."""
    X = _check_width(model, X)
    return build(model.spec).scores(model.params, X, s)


def representations(model, X, s=None, seed=0):
    """Representation-layer activations; sampled families draw once using ``seed``."""
    X = _check_width(model, X)
    rng = np.random.default_rng([int(seed), 0x2e9])
    return build(model.spec).represent(model.params, X, s, rng)


def combined_loss(model_or_spec, params, X, y, s, gamma, tape=None):
    """Evaluate the tradeoff loss on arrays; returns ``(combined, L_class, L_fair)``."""
    spec = model_or_spec.spec if isinstance(model_or_spec, TrainedModel) else model_or_spec
    family = build(spec)
    tape = tape or new_tape(spec.seed)
    total, terms = family.loss({k: Tensor(v) for k, v in params.items()},
                               np.asarray(X, dtype=np.float64), np.asarray(y, dtype=np.float64),
                               np.asarray(s), gamma, tape)
    return float(total.data), float(terms["class"].data), float(terms["fair"].data)


# checkpoints ----------------------------------------------------------------

def model_to_dict(model):
    return {
        "spec": model.spec.to_dict(),
        "gamma": model.gamma,
        "n_features": model.n_features,
        "loss_trace": [list(p) for p in model.loss_trace],
        "params": {k: {"shape": list(np.shape(v)), "values": np.asarray(v).ravel().tolist()}
                   for k, v in model.params.items()},
    }


def model_from_dict(d):
    params = {k: np.asarray(v["values"], dtype=np.float64).reshape(v["shape"])
              for k, v in d["params"].items()}
    return TrainedModel(ModelSpec.from_dict(d["spec"]), params, float(d["gamma"]),
                        int(d["n_features"]), [tuple(p) for p in d["loss_trace"]])


def save_model(model, path):
    Path(path).write_text(json.dumps(model_to_dict(model), indent=1))


def load_model(path):
    return model_from_dict(json.loads(Path(path).read_text()))
