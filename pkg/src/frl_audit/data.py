"""Tabular datasets: CSV loading, preprocessing, seeded splits and synthetic data.

Features are kept as a real matrix. Categorical columns hold integer codes
into the column's vocabulary until :func:`preprocess` one-hot encodes them.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    pass


class ParseError(ValueError):
    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class VocabularyError(ValueError):
    pass


@dataclass(frozen=True)
class Column:
    name: str
    kind: str  # "continuous" | "categorical"
    categories: tuple = ()

    def __post_init__(self):
        if self.kind not in ("continuous", "categorical"):
            raise SchemaError(f"column {self.name!r}: unknown kind {self.kind!r}")


@dataclass
class Dataset:
    name: str
    features: np.ndarray
    labels: np.ndarray
    sensitive: np.ndarray
    columns: list
    rows: np.ndarray = None  # original row ids, used for leakage audits

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim == 1:
            self.features = self.features[:, None]
        self.labels = np.asarray(self.labels).astype(np.int64)
        self.sensitive = np.asarray(self.sensitive).astype(np.int64)
        n = self.features.shape[0]
        if self.rows is None:
            self.rows = np.arange(n)
        self.rows = np.asarray(self.rows, dtype=np.int64)
        if len(self.labels) != n or len(self.sensitive) != n or len(self.rows) != n:
            raise ValueError("features, labels and sensitive must have the same number of rows")
        if not np.isin(self.labels, (0, 1)).all() or not np.isin(self.sensitive, (0, 1)).all():
            raise ValueError("labels and sensitive attribute must be binary 0/1")
        if len(self.columns) != self.features.shape[1]:
            raise ValueError("one column descriptor per feature column is required")
        for j, col in enumerate(self.columns):
            if col.kind == "categorical":
                codes = self.features[:, j]
                if n and (codes.min() < 0 or codes.max() >= len(col.categories)
                          or not np.all(codes == np.round(codes))):
                    raise VocabularyError(f"column {col.name!r} holds codes outside its vocabulary")

    def __len__(self):
        return self.features.shape[0]

    def subset(self, index):
        index = np.asarray(index)
        return Dataset(self.name, self.features[index], self.labels[index],
                       self.sensitive[index], list(self.columns), self.rows[index])


@dataclass
class Transform:
    """Per-column preprocessing state fitted on a training set."""

    columns: list
    means: dict = field(default_factory=dict)
    stds: dict = field(default_factory=dict)
    layout: list = field(default_factory=list)  # (column name, first output slot, width)

    @property
    def width(self):
        return sum(w for _, _, w in self.layout)

    def apply(self, ds):
        if [c.name for c in ds.columns] != [c.name for c in self.columns]:
            raise SchemaError("dataset schema differs from the fitted transform")
        out = np.zeros((len(ds), self.width))
        for j, (col, (name, start, width)) in enumerate(zip(self.columns, self.layout)):
            x = ds.features[:, j]
            if col.kind == "continuous":
                sd = self.stds[name]
                out[:, start] = 0.0 if sd == 0 else (x - self.means[name]) / sd
            else:
                codes = x.astype(np.int64)
                if len(codes) and (codes.min() < 0 or codes.max() >= width):
                    raise VocabularyError(f"column {name!r}: category outside the training vocabulary")
                out[np.arange(len(ds)), start + codes] = 1.0
        return out


@dataclass
class PreparedDataset:
    name: str
    features: np.ndarray
    labels: np.ndarray
    sensitive: np.ndarray
    transform: Transform
    rows: np.ndarray

    def __len__(self):
        return self.features.shape[0]

    def subset(self, index):
        index = np.asarray(index)
        return PreparedDataset(self.name, self.features[index], self.labels[index],
                               self.sensitive[index], self.transform, self.rows[index])


# loading --------------------------------------------------------------------

def _parse_schema(schema):
    features, label, sensitive = [], None, None
    for entry in schema:
        role = entry.get("role", "feature")
        if role == "label":
            label = entry
        elif role == "sensitive":
            sensitive = entry
        elif role == "feature":
            features.append(entry)
        else:
            raise SchemaError(f"column {entry.get('name')!r}: unknown role {role!r}")
    if label is None or sensitive is None:
        raise SchemaError("schema needs one 'label' and one 'sensitive' column")
    return features, label, sensitive


def _binarize(value, target):
    targets = target if isinstance(target, list) else [target]
    return int(value in {str(t).strip() for t in targets})


def load_dataset(path, schema, name=None):
    """Read a CSV (header row, comma separated) into a :class:`Dataset`.

    ``schema`` is a list of dicts: feature columns carry ``kind`` and
    optionally ``categories``; the label column has ``role: "label"`` and a
    ``positive`` value; the sensitive column has ``role: "sensitive"`` and a
    ``privileged`` value.
    """
    path = Path(path)
    features, label, sensitive = _parse_schema(schema)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ParseError("empty file") from None
        records = [r for r in reader if r]
    missing = [e["name"] for e in features + [label, sensitive] if e["name"] not in header]
    if missing:
        raise SchemaError(f"columns missing from {path.name}: {missing}")
    pos = {h: i for i, h in enumerate(header)}

    vocab = {}
    for e in features:
        if e.get("kind") == "categorical":
            if "categories" in e:
                vocab[e["name"]] = [str(c) for c in e["categories"]]
            else:
                seen = []
                for r in records:
                    v = r[pos[e["name"]]].strip()
                    if v not in seen:
                        seen.append(v)
                vocab[e["name"]] = sorted(seen)

    n = len(records)
    X = np.zeros((n, len(features)))
    y = np.zeros(n, dtype=np.int64)
    s = np.zeros(n, dtype=np.int64)
    for i, r in enumerate(records):
        row_no = i + 2  # 1-based, header is line 1
        if len(r) != len(header):
            raise ParseError(f"expected {len(header)} fields, got {len(r)}", row_no)
        for j, e in enumerate(features):
            cell = r[pos[e["name"]]].strip()
            if cell == "":
                raise ParseError(f"empty cell in column {e['name']!r}", row_no)
            if e.get("kind") == "categorical":
                try:
                    X[i, j] = vocab[e["name"]].index(cell)
                except ValueError:
                    raise VocabularyError(
                        f"row {row_no}: value {cell!r} not in vocabulary of {e['name']!r}") from None
            else:
                try:
                    X[i, j] = float(cell)
                except ValueError:
                    raise ParseError(f"non-numeric value {cell!r} in column {e['name']!r}", row_no) from None
        for target, entry, key in ((y, label, "positive"), (s, sensitive, "privileged")):
            cell = r[pos[entry["name"]]].strip()
            if cell == "":
                raise ParseError(f"empty cell in column {entry['name']!r}", row_no)
            target[i] = _binarize(cell, entry[key])
    columns = [Column(e["name"], e.get("kind", "continuous"), tuple(vocab.get(e["name"], ())))
               for e in features]
    return Dataset(name or path.stem, X, y, s, columns)


# preprocessing --------------------------------------------------------------

def fit_transform(train):
    if len(train) == 0:
        raise ValueError("cannot fit preprocessing on an empty training set")
    tr = Transform(list(train.columns))
    start = 0
    for j, col in enumerate(train.columns):
        if col.kind == "continuous":
            x = train.features[:, j]
            tr.means[col.name] = float(x.mean())
            tr.stds[col.name] = float(x.std())
            tr.layout.append((col.name, start, 1))
            start += 1
        else:
            width = len(col.categories)
            tr.layout.append((col.name, start, width))
            start += width
    return tr


def preprocess(train, apply_to=()):
    """Standardize continuous and one-hot encode categorical columns.

    Statistics come from ``train`` only. Returns the prepared train set
    followed by every dataset in ``apply_to``.
    """
    tr = fit_transform(train)
    out = []
    for ds in [train, *apply_to]:
        out.append(PreparedDataset(ds.name, tr.apply(ds), ds.labels.copy(),
                                   ds.sensitive.copy(), tr, ds.rows.copy()))
    return out


# splitting ------------------------------------------------------------------

def holdout_indices(n, seed, iteration):
    if n < 3:
        raise ValueError("holdout split needs at least 3 rows")
    rng = np.random.default_rng([int(seed), int(iteration)])
    perm = rng.permutation(n)
    n_train = math.ceil(2 * n / 3)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def holdout_split(ds, seed, iteration):
    """2/3 train, 1/3 test; the permutation is seeded by ``(seed, iteration)``."""
    tr, te = holdout_indices(len(ds), seed, iteration)
    return ds.subset(tr), ds.subset(te)


def kfold(train, k, seed):
    """``k`` (fit, validate) positional index pairs; fold sizes differ by at most one."""
    n = train if isinstance(train, (int, np.integer)) else len(train)
    if k < 2:
        raise ValueError("k must be at least 2")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of rows ({n})")
    rng = np.random.default_rng([int(seed), 0x6b66])
    perm = rng.permutation(n)
    folds = np.array_split(perm, k)
    pairs = []
    for i in range(k):
        val = np.sort(folds[i])
        fit = np.sort(np.concatenate([folds[j] for j in range(k) if j != i]))
        pairs.append((fit, val))
    return pairs


# synthetic data -------------------------------------------------------------

@dataclass
class SynthSpec:
    """Explicit joint table over (x_1..x_d, s, y).

    ``joint`` has shape ``alphabet + (2, 2)``; the last two axes index S and Y.
    """

    n: int
    joint: np.ndarray
    seed: int = 0
    pi_s: float = None
    name: str = "synthetic"

    def __post_init__(self):
        self.joint = np.asarray(self.joint, dtype=np.float64)
        if self.joint.ndim < 3 or self.joint.shape[-2:] != (2, 2):
            raise ValueError("joint must have shape alphabet + (2, 2)")
        if np.any(self.joint < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(self.joint.sum() - 1.0) > 1e-12:
            raise ValueError(f"probabilities sum to {self.joint.sum()!r}, not 1")
        p1 = float(self.joint[..., 1, :].sum())
        if self.pi_s is not None and abs(self.pi_s - p1) > 1e-9:
            raise ValueError("pi_s disagrees with the joint table")
        self.pi_s = p1

    @property
    def alphabet(self):
        return self.joint.shape[:-2]

    @classmethod
    def from_json(cls, doc):
        if isinstance(doc, (str, Path)):
            doc = json.loads(Path(doc).read_text())
        if "joint" in doc:
            joint = np.asarray(doc["joint"], dtype=np.float64)
        else:
            joint = factorized_joint(doc["pi_s"], doc["p_y_given_s"],
                                     [np.asarray(f) for f in doc["p_x_given_sy"]])
        return cls(int(doc["n"]), joint, int(doc.get("seed", 0)),
                   doc.get("pi_s") if "joint" in doc else None, doc.get("name", "synthetic"))


def factorized_joint(pi_s, p_y_given_s, p_x_given_sy):
    """Build ``P(x, s, y) = P(s) P(y|s) prod_j P(x_j | s, y)``.

    ``p_y_given_s`` is ``[P(y=1|s=0), P(y=1|s=1)]``; each entry of
    ``p_x_given_sy`` is a (2, 2, m_j) array of conditionals indexed [s, y, x].
    """
    ps = np.array([1.0 - pi_s, pi_s])
    py1 = np.asarray(p_y_given_s, dtype=np.float64)
    psy = ps[:, None] * np.stack([1.0 - py1, py1], axis=1)
    alphabet = tuple(np.shape(f)[-1] for f in p_x_given_sy)
    joint = np.zeros(alphabet + (2, 2))
    for s in (0, 1):
        for y in (0, 1):
            cell = np.array(psy[s, y])
            for f in p_x_given_sy:
                cell = np.multiply.outer(cell, np.asarray(f, dtype=np.float64)[s, y])
            joint[..., s, y] = cell
    return joint / joint.sum()


def _mi_bits(pxy):
    px = pxy.sum(axis=1, keepdims=True)
    py = pxy.sum(axis=0, keepdims=True)
    mask = pxy > 0
    return float(np.sum(pxy[mask] * np.log2(pxy[mask] / (px @ py)[mask])))


def exact_mi(joint):
    """Analytic ``(I(X;S), I(X;Y))`` in bits for a joint table over (x..., s, y)."""
    joint = np.asarray(joint, dtype=np.float64)
    m = int(np.prod(joint.shape[:-2]))
    flat = joint.reshape(m, 2, 2)
    return _mi_bits(flat.sum(axis=2)), _mi_bits(flat.sum(axis=1))


def synth_discrete(spec):
    """Draw ``spec.n`` i.i.d. rows from the table.

    Returns ``(dataset, exact_I_XS, exact_I_XY)``; the informations are computed
    from the table, not from the sample.
    """
    ps = spec.joint[..., 1, :].sum()
    if ps <= 0 or ps >= 1:
        raise ValueError("both values of S need positive probability")
    rng = np.random.default_rng(int(spec.seed))
    flat = spec.joint.reshape(-1)
    draws = rng.choice(flat.size, size=int(spec.n), p=flat / flat.sum())
    idx = np.unravel_index(draws, spec.joint.shape)
    X = np.stack(idx[:-2], axis=1).astype(np.float64)
    s = idx[-2].astype(np.int64)
    y = idx[-1].astype(np.int64)
    columns = [Column(f"x{j}", "continuous") for j in range(X.shape[1])]
    i_xs, i_xy = exact_mi(spec.joint)
    return Dataset(spec.name, X, y, s, columns), i_xs, i_xy

