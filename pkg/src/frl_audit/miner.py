"""Seeded adversarial model search for predicting S from a representation.

Candidates come from four families (logistic regression, gradient-boosted
trees, k-nearest neighbours, one-hidden-layer tanh network). Each trial is
scored by 3-fold AUC on the training representation only; the winner is refit
on all training rows and evaluated once on the held-out rows.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field

import numpy as np
from sklearn.ensemble import HistGradientBoostingClassifier
from sklearn.exceptions import ConvergenceWarning
from sklearn.linear_model import LogisticRegression
from sklearn.neighbors import KNeighborsClassifier
from sklearn.neural_network import MLPClassifier
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from . import metrics

CANDIDATE_FAMILIES = ("linear", "tree_ensemble", "knn", "mlp")

SEARCH_SPACE = {
    "linear": {"C": (1e-3, 1e3)},
    "tree_ensemble": {"n_trees": (10, 100), "depth": (1, 4), "learning_rate": (0.03, 0.3)},
    "knn": {"k": (1, 50), "weights": ("uniform", "distance")},
    "mlp": {"hidden": (4, 32), "epochs": (50, 200)},
}


@dataclass
class CandidateSpec:
    family: str
    params: dict
    seed: int

    def __post_init__(self):
        if self.family not in CANDIDATE_FAMILIES:
            raise ValueError(f"unknown candidate family {self.family!r}")

    def to_dict(self):
        return {"family": self.family, "params": dict(sorted(self.params.items())), "seed": int(self.seed)}


@dataclass
class MinerReport:
    best: CandidateSpec
    validation_auc: float
    test_acc: float
    test_auc: float
    majority_share: float
    trials: int
    budget: int
    trial_scores: list = field(default_factory=list)

    def to_dict(self):
        return {
            "best": self.best.to_dict(),
            "validation_auc": self.validation_auc,
            "test_acc": self.test_acc,
            "test_auc": self.test_auc,
            "majority_share": self.majority_share,
            "trials": self.trials,
            "budget": self.budget,
            "trial_scores": list(self.trial_scores),
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d):
        best = CandidateSpec(d["best"]["family"], d["best"]["params"], d["best"]["seed"])
        return cls(best, d["validation_auc"], d["test_acc"], d["test_auc"], d["majority_share"],
                   d["trials"], d["budget"], d.get("trial_scores", []))


def sample_candidate(rng, seed):
    family = CANDIDATE_FAMILIES[rng.integers(len(CANDIDATE_FAMILIES))]
    space = SEARCH_SPACE[family]
    if family == "linear":
        lo, hi = np.log10(space["C"])
        params = {"C": float(10 ** rng.uniform(lo, hi))}
    elif family == "tree_ensemble":
        params = {"n_trees": int(rng.integers(space["n_trees"][0], space["n_trees"][1] + 1)),
                  "depth": int(rng.integers(space["depth"][0], space["depth"][1] + 1)),
                  "learning_rate": float(rng.uniform(*space["learning_rate"]))}
    elif family == "knn":
        params = {"k": int(rng.integers(space["k"][0], space["k"][1] + 1)),
                  "weights": str(space["weights"][rng.integers(2)])}
    else:
        params = {"hidden": int(rng.integers(space["hidden"][0], space["hidden"][1] + 1)),
                  "epochs": int(rng.integers(space["epochs"][0], space["epochs"][1] + 1))}
    return CandidateSpec(family, params, int(seed))


def fit_candidate(spec, Z, s):
    """Train one candidate; returns a fitted estimator with ``predict_proba``."""
    Z = np.asarray(Z, dtype=np.float64)
    s = np.asarray(s).astype(np.int64)
    p = spec.params
    if spec.family == "linear":
        model = make_pipeline(StandardScaler(), LogisticRegression(C=p["C"], max_iter=1000))
    elif spec.family == "tree_ensemble":
        model = HistGradientBoostingClassifier(max_iter=p["n_trees"], max_depth=p["depth"],
                                               learning_rate=p["learning_rate"],
                                               early_stopping=False,
                                               random_state=spec.seed % 2**32)
    elif spec.family == "knn":
        if p["k"] > len(Z):
            raise ValueError(f"k={p['k']} exceeds the number of training rows ({len(Z)})")
        model = make_pipeline(StandardScaler(),
                              KNeighborsClassifier(n_neighbors=p["k"], weights=p["weights"]))
    else:
        model = make_pipeline(StandardScaler(),
                              MLPClassifier(hidden_layer_sizes=(p["hidden"],), activation="tanh",
                                            max_iter=p["epochs"], random_state=spec.seed % 2**32))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConvergenceWarning)
        model.fit(Z, s)
    return model


def positive_proba(model, Z):
    proba = model.predict_proba(np.asarray(Z, dtype=np.float64))
    classes = list(model.classes_)
    if 1 not in classes:
        return np.zeros(len(Z))
    return proba[:, classes.index(1)]


def _clip_k(spec, n_fit):
    # inner folds are smaller than the full train set
    if spec.family == "knn" and spec.params["k"] > n_fit:
        return CandidateSpec(spec.family, dict(spec.params, k=n_fit), spec.seed)
    return spec


def _stratified_folds(s, k, seed):
    rng = np.random.default_rng([int(seed), 0x3f])
    folds = [[] for _ in range(k)]
    for g in (0, 1):
        idx = rng.permutation(np.flatnonzero(s == g))
        for i, part in enumerate(np.array_split(idx, k)):
            folds[i].extend(part.tolist())
    return [np.sort(np.array(f, dtype=np.int64)) for f in folds]


def validation_auc(spec, Z, s, folds=3, seed=0):
    parts = _stratified_folds(s, folds, seed)
    aucs = []
    for i in range(folds):
        val = parts[i]
        fit_idx = np.sort(np.concatenate([parts[j] for j in range(folds) if j != i]))
        if len(np.unique(s[fit_idx])) < 2 or len(np.unique(s[val])) < 2:
            continue
        model = fit_candidate(_clip_k(spec, len(fit_idx)), Z[fit_idx], s[fit_idx])
        aucs.append(metrics.auc(positive_proba(model, Z[val]), s[val]))
    return float(np.mean(aucs)) if aucs else 0.5


def majority_share(s):
    s = np.asarray(s)
    share = float(np.mean(s == 1))
    return max(share, 1.0 - share)


def mine(train_Z, s_train, test_Z, s_test, budget=32, seed=0):
    """Search ``budget`` candidates for the best predictor of S; report held-out ACC/AUC."""
    if budget < 1:
        raise ValueError("budget must be at least 1")
    train_Z = np.asarray(train_Z, dtype=np.float64)
    test_Z = np.asarray(test_Z, dtype=np.float64)
    if train_Z.ndim == 1:
        train_Z = train_Z[:, None]
    if test_Z.ndim == 1:
        test_Z = test_Z[:, None]
    s_train = np.asarray(s_train).astype(np.int64)
    s_test = np.asarray(s_test).astype(np.int64)
    if len(np.unique(s_train)) < 2:
        raise ValueError("s_train must contain both groups")
    if not (np.all(np.isfinite(train_Z)) and np.all(np.isfinite(test_Z))):
        raise ValueError("representation contains non-finite entries")
    master = np.random.default_rng([int(seed), 0x6d1])
    trial_seeds = master.integers(0, 2**31 - 1, size=budget)
    space_rng = np.random.default_rng([int(seed), 0x6d2])
    candidates = [sample_candidate(space_rng, ts) for ts in trial_seeds]

    best, best_score, scores = None, -np.inf, []
    for cand in candidates:
        score = validation_auc(cand, train_Z, s_train, folds=3, seed=cand.seed)
        scores.append(score)
        if score > best_score:
            best, best_score = cand, score
    model = fit_candidate(_clip_k(best, len(train_Z)), train_Z, s_train)
    proba = positive_proba(model, test_Z)
    test_acc = metrics.y_acc((proba >= 0.5).astype(np.float64), s_test)
    test_auc = metrics.auc(proba, s_test) if len(np.unique(s_test)) == 2 else float("nan")
    return MinerReport(best, float(best_score), float(test_acc), float(test_auc),
                       majority_share(s_train), len(candidates), int(budget), scores)
