"""Exact plug-in mutual information on finite samples and the injectivity battery.

A sample of rows is read as a list of symbols: two rows are the same symbol
only if they are equal at full float64 precision. Mutual information is in
bits throughout.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import SynthSpec, synth_discrete
from .numerics import INJECTIVE, LayerSpec, forward


@dataclass
class JointTable:
    """Counts of (symbol, s) pairs."""

    counts: np.ndarray  # (n_symbols, 2)

    @property
    def total(self):
        return int(self.counts.sum())

    @property
    def probabilities(self):
        return self.counts / self.counts.sum()

    @classmethod
    def from_samples(cls, rows, s):
        rows = np.asarray(rows)
        if rows.ndim == 1:
            rows = rows[:, None]
        s = np.asarray(s).astype(np.int64).ravel()
        if rows.shape[0] != s.size:
            raise ValueError("rows and s must have the same length")
        if s.size == 0:
            raise ValueError("empty input")
        _, symbols = np.unique(rows, axis=0, return_inverse=True)
        symbols = np.asarray(symbols).ravel()
        counts = np.zeros((symbols.max() + 1, 2))
        np.add.at(counts, (symbols, s), 1.0)
        return cls(counts)

    def mutual_information(self):
        p = self.probabilities
        pz = p.sum(axis=1, keepdims=True)
        ps = p.sum(axis=0, keepdims=True)
        mask = p > 0
        return float(max(np.sum(p[mask] * np.log2(p[mask] / (pz @ ps)[mask])), 0.0))


def entropy_bits(rows):
    rows = np.asarray(rows)
    if rows.ndim == 1:
        rows = rows[:, None]
    _, counts = np.unique(rows, axis=0, return_counts=True)
    p = counts / counts.sum()
    return float(-np.sum(p * np.log2(p)))


def plugin_mi(rows, s):
    """Empirical I(rows; s) in bits with each distinct row as one symbol."""
    return JointTable.from_samples(rows, s).mutual_information()


def quantize(Z, bins):
    """Equal-width binning per column over its observed range.

    Values on an interior edge go to the upper bin; the maximum goes to the last
    bin; constant columns map to bin 0.
    """
    if bins < 1:
        raise ValueError("bins must be at least 1")
    Z = np.asarray(Z, dtype=np.float64)
    squeeze = Z.ndim == 1
    if squeeze:
        Z = Z[:, None]
    lo = Z.min(axis=0)
    span = Z.max(axis=0) - lo
    out = np.zeros(Z.shape, dtype=np.int64)
    live = span > 0
    if live.any():
        u = (Z[:, live] - lo[live]) / span[live]
        out[:, live] = np.minimum(np.floor(u * bins).astype(np.int64), bins - 1)
    return out[:, 0] if squeeze else out


def bernoulli_layer(logits, rng):
    """Seeded Bernoulli sample of ``sigmoid(logits)``."""
    p = 1.0 / (1.0 + np.exp(-np.asarray(logits, dtype=np.float64)))
    return (rng.random(p.shape) < p).astype(np.float64)


def _check_injective_stack(stack):
    for i, layer in enumerate(stack):
        if layer.activation not in INJECTIVE:
            raise ValueError(f"layer {i}: activation {layer.activation!r} is not injective")
        if layer.in_width != layer.out_width:
            raise ValueError(f"layer {i}: weights must be square for the injectivity claim")
        if np.linalg.matrix_rank(layer.weights) < layer.in_width:
            raise ValueError(f"layer {i}: weight matrix is rank deficient")


def theorem1_check(stack, ds, bits=(1,), injective=True, tol=1e-9):
    """Plug-in I(Z^i; S) for every layer against I(X; S), plus quantized variants.

    With ``injective=True`` every layer must be square, full rank and use an
    injective activation; the report then flags layers whose information
    differs from the input's by more than ``tol`` bits.
    """
    X = np.asarray(ds.features, dtype=np.float64)
    if not np.all(X == np.round(X)):
        raise ValueError("theorem check expects integer-valued features")
    if injective:
        _check_injective_stack(stack)
    s = ds.sensitive
    i_x = plugin_mi(X, s)
    layers = []
    for i, z in enumerate(forward(stack, X), start=1):
        i_z = plugin_mi(z, s)
        layers.append({
            "layer": i,
            "activation": stack[i - 1].activation,
            "mi_layer": i_z,
            "mi_input": i_x,
            "equal": bool(abs(i_z - i_x) < tol),
            "distinct_rows": int(np.unique(z, axis=0).shape[0]),
            "quantized": {str(b): plugin_mi(quantize(z, 2 ** b), s) for b in bits},
        })
    return {
        "n": int(X.shape[0]),
        "distinct_inputs": int(np.unique(X, axis=0).shape[0]),
        "mi_input": i_x,
        "tolerance": tol,
        "all_equal": all(layer["equal"] for layer in layers),
        "layers": layers,
    }


def report_json(report):
    return json.dumps(report, indent=2)


def random_full_rank_stack(rng, width, depth, activation="tanh"):
    """Square layers with uniformly initialised, numerically full-rank weights."""
    stack = []
    while len(stack) < depth:
        layer = LayerSpec.random(rng, width, width, activation)
        if np.linalg.matrix_rank(layer.weights) == width:
            stack.append(layer)
    return stack


def bernoulli_variant(stack, X, rng):
    """Run ``stack`` but replace the last layer's activation by Bernoulli(sigmoid(.)) draws."""
    h = np.asarray(X, dtype=np.float64)
    if len(stack) > 1:
        h = forward(stack[:-1], h)[-1]
    last = stack[-1]
    return bernoulli_layer(h @ last.weights.T + last.bias, rng)


def battery_dataset(seed, n=500, d=4, alphabet=4):
    """Discrete data where the top half of x0's alphabet marks S = 1 (exact I(X;S) = 1 bit)."""
    half = alphabet // 2
    lo = [1.0 / half] * half + [0.0] * (alphabet - half)
    hi = [0.0] * half + [1.0 / (alphabet - half)] * (alphabet - half)
    flat = [1.0 / alphabet] * alphabet
    rest = [[flat, flat], [flat, flat]]
    doc = {"n": n, "seed": seed, "pi_s": 0.5, "p_y_given_s": [0.3, 0.7],
           "p_x_given_sy": [[[lo, lo], [hi, hi]]] + [rest] * (d - 1), "name": "battery"}
    ds, i_xs, _ = synth_discrete(SynthSpec.from_json(doc))
    return ds, i_xs


def theorem1_battery(activation="tanh", seed=0, n=500, d=4, alphabet=4, depth=4, bits=(1,)):
    """Full check on fresh data: per-layer equality, quantized MI and a Bernoulli last layer."""
    ds, i_xs = battery_dataset(seed, n, d, alphabet)
    rng = np.random.default_rng([int(seed), 0x7e1])
    stack = random_full_rank_stack(rng, d, depth, activation)
    injective = activation in INJECTIVE
    report = theorem1_check(stack, ds, bits=bits, injective=injective)
    sample = bernoulli_variant(stack, ds.features, np.random.default_rng([int(seed), 0xbe]))
    report.update({"activation": activation, "seed": int(seed), "injective": injective,
                   "exact_I_XS": i_xs, "bernoulli_mi": plugin_mi(sample, ds.sensitive)})
    return report
