"""Task and fair-allocation metrics.

All functions take plain arrays. ``s == 1`` marks the privileged group and
``s == 0`` the underprivileged one.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

FIELDS = ("fold", "gamma", "acc", "auc", "y_discrim", "audc", "spd", "delta", "rnd", "threshold_count")


@dataclass
class MetricRecord:
    fold: int
    gamma: float
    acc: float
    auc: float
    y_discrim: float
    audc: float
    spd: float
    delta: float
    rnd: float
    threshold_count: int

    def to_dict(self):
        d = asdict(self)
        return {k: d[k] for k in FIELDS}


def _pair(a, b):
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return a, b


def _groups(s):
    s = np.asarray(s).ravel()
    g1 = s == 1
    g0 = s == 0
    if not g1.any() or not g0.any():
        raise ValueError("both sensitive groups must be non-empty")
    return g0, g1


def y_acc(y_hat, y):
    y_hat, y = _pair(y_hat, y)
    return float(1.0 - np.mean(np.abs(y - y_hat)))


def auc(scores, y):
    """Mann-Whitney AUC; tied positive/negative pairs count one half."""
    scores, y = _pair(scores, y)
    pos = y == 1
    n1 = int(pos.sum())
    n0 = y.size - n1
    if n1 == 0 or n0 == 0:
        raise ValueError("AUC is undefined when only one class is present")
    order = np.argsort(scores, kind="mergesort")
    sorted_scores = scores[order]
    ranks = np.empty(y.size)
    # average ranks over tie blocks
    boundaries = np.flatnonzero(np.diff(sorted_scores)) + 1
    starts = np.concatenate([[0], boundaries])
    ends = np.concatenate([boundaries, [y.size]])
    for a, b in zip(starts, ends):
        ranks[order[a:b]] = 0.5 * (a + b - 1) + 1.0
    u = ranks[pos].sum() - n1 * (n1 + 1) / 2.0
    return float(u / (n1 * n0))


def y_discrim(y_hat, s):
    y_hat, s = _pair(y_hat, s)
    g0, g1 = _groups(s)
    return float(abs(y_hat[g1].mean() - y_hat[g0].mean()))


def thresholds(count=100):
    if count < 2:
        raise ValueError("need at least two thresholds")
    return np.arange(count) / (count - 1)


def audc(scores, s, count=100):
    """Mean discrimination of ``1[score >= t]`` over ``count`` equispaced t in [0, 1]."""
    scores, s = _pair(scores, s)
    g0, g1 = _groups(s)
    t = thresholds(count)
    above = scores[None, :] >= t[:, None]
    disc = np.abs(above[:, g1].mean(axis=1) - above[:, g0].mean(axis=1))
    return float(disc.mean())


def spd(y_hat, s):
    """``P(y_hat=1 | s=0) - P(y_hat=1 | s=1)``."""
    y_hat, s = _pair(y_hat, s)
    g0, g1 = _groups(s)
    return float(y_hat[g0].mean() - y_hat[g1].mean())


def delta(y_hat, y, s):
    """yDiscrim minus yAcc, with the sign as conventionally printed (lower is better)."""
    return y_discrim(y_hat, s) - y_acc(y_hat, y)


def _rnd_sum(protected_in_order, step):
    n = protected_in_order.size
    total = protected_in_order.sum()
    cuts = np.arange(step, n + 1, step)
    top = np.cumsum(protected_in_order)[cuts - 1]
    return float(np.sum(np.abs(top / cuts - total / n) / np.log2(cuts)))


def rnd(scores, s, step=10):
    """Normalized discounted difference of the underprivileged share in top-i cuts.

    Ranking is by descending score, ties broken by original position. Cuts are
    ``step, 2*step, ...`` up to N. The normalizer is the same sum for a ranking
    that puts every underprivileged member last. That ranking is not always the
    most extreme one: when the underprivileged group is ranked above its share
    the value can exceed 1 (N=11, six of them ranked first gives 1.2).
    """
    scores, s = _pair(scores, s)
    n = scores.size
    if n < step:
        raise ValueError(f"rND needs at least {step} items, got {n}")
    _groups(s)
    protected = (s == 0).astype(np.float64)
    order = np.argsort(-scores, kind="mergesort")
    worst = np.sort(protected)  # zeros first: protected members at the end
    z = _rnd_sum(worst, step)
    if z == 0:
        raise ValueError("rND normalizer is zero for this group composition")
    return _rnd_sum(protected[order], step) / z


def evaluate(scores, y, s, fold=0, gamma=0.0, threshold=0.5, count=100, step=10):
    """All allocation metrics for one (fold, gamma) cell."""
    scores = np.asarray(scores, dtype=np.float64)
    y_hat = (scores >= threshold).astype(np.float64)
    return MetricRecord(
        fold=int(fold),
        gamma=float(gamma),
        acc=y_acc(y_hat, y),
        auc=auc(scores, y),
        y_discrim=y_discrim(y_hat, s),
        audc=audc(scores, s, count),
        spd=spd(y_hat, s),
        delta=delta(y_hat, y, s),
        rnd=rnd(scores, s, step),
        threshold_count=int(count),
    )
