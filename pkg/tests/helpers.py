"""Shared builders for the test modules."""
import numpy as np

from frl_audit import data, harness

XDEP = [[[0.4, 0.3, 0.2, 0.1], [0.1, 0.2, 0.3, 0.4]]] * 2
COPY_S = [[[1.0, 0.0], [1.0, 0.0]], [[0.0, 1.0], [0.0, 1.0]]]


def biased_doc(n=2000, seed=11):
    """x0 copies S (exact I(X;S) = 1 bit), S shifts P(Y), x1..x3 depend on Y."""
    return {"n": n, "seed": seed, "pi_s": 0.5, "p_y_given_s": [0.3, 0.7],
            "p_x_given_sy": [COPY_S, XDEP, XDEP, XDEP]}


def micro_config(out, families=("debias",), **kw):
    doc = dict(experiment="micro", dataset={"name": "toy", "synthetic": biased_doc(300, 7)},
               models=[{"family": f} for f in families], r=2, k=2, n_iter=2,
               gammas=[0.0, 1.0], budget=2, output=str(out))
    doc.update(kw)
    return harness.ExperimentConfig(**doc)


def arrays_dataset(X, y, s, name="toy"):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    cols = [data.Column(f"x{j}", "continuous") for j in range(X.shape[1])]
    return data.Dataset(name, X, y, s, cols)


def prepared(X, y, s):
    return data.preprocess(arrays_dataset(X, y, s))[0]
