"""Allocation metrics on tiny hand-made cases.

    python demos/02_metrics_tour.py
"""
import numpy as np

from frl_audit import metrics

y = np.array([1, 0, 0, 0])
y_hat = np.array([1, 1, 0, 0])
print("accuracy", metrics.y_acc(y_hat, y))                        # 0.75
print("auc", metrics.auc([0.8, 0.6, 0.4], [1, 0, 1]))             # 0.5

s = np.array([1, 1, 0])
print("yDiscrim", metrics.y_discrim([1, 0, 0], s))                 # 0.5
print("spd", metrics.spd([1, 1, 0, 0], [0, 0, 1, 1]))               # +1
print("audc, T=100", metrics.audc([1.0, 0.0], [1, 0]))             # 0.99
print("audc, T=2", metrics.audc([1.0, 0.0], [1, 0], count=2))      # 0.5

# rND: s = 0 is the underprivileged group; rank order is descending score
scores = np.linspace(1, 0, 20)
for name, order in [("alternating", [1, 0] * 10),
                    ("7 of top 10", [1] * 7 + [0] * 3 + [1] * 3 + [0] * 7),
                    ("all last", [0] * 10 + [1] * 10)]:
    print(f"rND {name}: {metrics.rnd(scores, 1 - np.array(order)):.3f}")

rng = np.random.default_rng(0)
sc = rng.random(200)
yy = (sc + 0.3 * rng.normal(size=200) > 0.5).astype(float)
ss = rng.integers(0, 2, 200)
print(metrics.evaluate(sc, yy, ss, fold=0, gamma=0.0).to_dict())
