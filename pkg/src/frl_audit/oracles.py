"""Slow, loop-based reference implementations.

Written straight from the definitions with Python scalars so they share no
code path with the vectorised versions they check.
"""
from __future__ import annotations

import math
from collections import Counter


def _rate(values, groups, g):
    picked = [v for v, s in zip(values, groups) if s == g]
    return sum(picked) / len(picked)


def acc_ref(y_hat, y):
    return sum(1 for a, b in zip(y_hat, y) if a == b) / len(y)


def auc_ref(scores, y):
    pos = [sc for sc, t in zip(scores, y) if t == 1]
    neg = [sc for sc, t in zip(scores, y) if t == 0]
    total = 0.0
    for p in pos:
        for q in neg:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(pos) * len(neg))


def discrim_ref(y_hat, s):
    return abs(_rate(y_hat, s, 1) - _rate(y_hat, s, 0))


def audc_ref(scores, s, count=100):
    total = 0.0
    for j in range(count):
        t = j / (count - 1)
        total += discrim_ref([1.0 if v >= t else 0.0 for v in scores], s)
    return total / count


def spd_ref(y_hat, s):
    return _rate(y_hat, s, 0) - _rate(y_hat, s, 1)


def delta_ref(y_hat, y, s):
    return discrim_ref(y_hat, s) - acc_ref(y_hat, y)


def _rnd_raw(protected, step):
    n = len(protected)
    share = sum(protected) / n
    total = 0.0
    for i in range(step, n + 1, step):
        total += abs(sum(protected[:i]) / i - share) / math.log2(i)
    return total


def rnd_ref(scores, s, step=10):
    """``None`` when the normalizer vanishes."""
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    protected = [1 if s[i] == 0 else 0 for i in order]
    worst = sorted(protected)
    z = _rnd_raw(worst, step)
    if z == 0:
        return None
    return _rnd_raw(protected, step) / z


def mi_ref(rows, s):
    """Plug-in I(rows; s) in bits, counting tuples."""
    keys = [tuple(float(v) for v in (r if hasattr(r, "__len__") else [r])) for r in rows]
    n = len(keys)
    joint = Counter(zip(keys, (int(v) for v in s)))
    pz = Counter(keys)
    ps = Counter(int(v) for v in s)
    total = 0.0
    for (z, g), c in joint.items():
        total += (c / n) * math.log2(c * n / (pz[z] * ps[g]))
    return total


def mmd2_ref(a, b, bandwidth):
    def k(x, y):
        d2 = sum((p - q) ** 2 for p, q in zip(x, y))
        return math.exp(-d2 / (2.0 * bandwidth ** 2))
    aa = sum(k(x, y) for x in a for y in a) / len(a) ** 2
    bb = sum(k(x, y) for x in b for y in b) / len(b) ** 2
    ab = sum(k(x, y) for x in a for y in b) / (len(a) * len(b))
    return aa + bb - 2.0 * ab
