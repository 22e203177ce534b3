"""Repeated hold-out experiment runner.

For every repeat ``i``: split 2/3 train and 1/3 test, standardize on train,
pick hyperparameters by k-fold validation AUC at gamma = 0, refit the winner
from scratch at every gamma, score the test rows, dump the train/test
representations and hand them to the miner. Each stage persists its output
so stages can be run separately (see the ``frl-audit`` verbs) or in one go
with :func:`run_experiment`.

Layout under ``<output>/<experiment>/``::

    raw/<dataset>/fold_<i>/{split.json, miner.json}
    <model>/<dataset>/fold_<i>/tuning.json
    <model>/<dataset>/fold_<i>/gamma_<g>/{metrics.json, miner.json, repr_train.csv,
                                          repr_test.csv, representation.json}
    <model>/<dataset>/{summary.json, tradeoff.csv, miner.csv}
    dataset.json, failures.json
"""
from __future__ import annotations

import copy
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from . import data, metrics, miner
from .models import ModelSpec, TrainingDivergence, fit, predict_scores, representations

DEFAULT_GAMMAS = tuple(round(0.1 * i, 1) for i in range(11))

FULL_SCALE_DEFAULTS = {"r": 15, "k": 3, "seed": 123, "n_iter": 100, "gammas": list(DEFAULT_GAMMAS),
                       "budget": 32, "n_boot": 100}
DESK_PRESET = {"r": 5, "k": 2, "n_iter": 10, "budget": 8}

_COMMON_SPACE = {
    "lr": {"log_uniform": [1e-3, 3e-2]},
    "epochs": [20, 40],
    "batch_size": [32, 64],
    "encoder_widths": [[16], [32]],
    "rep_width": [4, 8],
}

DEFAULT_SEARCH_SPACE = {
    "mlp": dict(_COMMON_SPACE),
    "debias": dict(_COMMON_SPACE, adversary_widths=[[8], [16]]),
    "ddc": dict(_COMMON_SPACE),
    "vfae": dict(_COMMON_SPACE),
    "lfr": {"lr": {"log_uniform": [1e-3, 3e-2]}, "epochs": [20, 40], "batch_size": [32, 64],
            "rep_width": [5, 10], "recon_weight": [0.01, 0.1, 1.0]},
    "binary_mi": dict(_COMMON_SPACE),
    "det_binary_mi": dict(_COMMON_SPACE),
}

RATE_COLUMNS = ("acc", "auc", "audc", "y_discrim", "spd", "delta", "rnd")
# columns flipped to "higher is fairer" in tradeoff.csv
FLIPPED = ("audc", "y_discrim", "rnd")


class ConfigError(ValueError):
    """Config failed validation; ``field`` names the offending key path."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class TuneError(RuntimeError):
    pass


class CellError(RuntimeError):
    def __init__(self, fold, gamma, exc):
        super().__init__(f"fold {fold}, gamma {gamma}: {exc}")
        self.fold = fold
        self.gamma = gamma


# config ---------------------------------------------------------------------

def config_schema():
    return json.loads(resources.files("frl_audit").joinpath("config_schema.json").read_text())


@dataclass
class ExperimentConfig:
    experiment: str
    dataset: dict
    models: list
    r: int = FULL_SCALE_DEFAULTS["r"]
    k: int = FULL_SCALE_DEFAULTS["k"]
    seed: int = FULL_SCALE_DEFAULTS["seed"]
    n_iter: int = FULL_SCALE_DEFAULTS["n_iter"]
    gammas: list = field(default_factory=lambda: list(DEFAULT_GAMMAS))
    budget: int = FULL_SCALE_DEFAULTS["budget"]
    n_boot: int = FULL_SCALE_DEFAULTS["n_boot"]
    output: str = "runs"
    workers: int = 1

    def __post_init__(self):
        doc = self.to_dict()
        validate(doc)
        self.gammas = [float(g) for g in self.gammas]

    def to_dict(self):
        return {"experiment": self.experiment, "dataset": copy.deepcopy(self.dataset),
                "models": copy.deepcopy(self.models), "r": self.r, "k": self.k, "seed": self.seed,
                "n_iter": self.n_iter, "gammas": list(self.gammas), "budget": self.budget,
                "n_boot": self.n_boot, "output": self.output, "workers": self.workers}

    @classmethod
    def from_dict(cls, doc, preset=None):
        validate(doc)
        merged = dict(preset or {})
        merged.update(doc)
        return cls(**merged)

    @classmethod
    def desk(cls, **doc):
        return cls.from_dict(doc, preset=DESK_PRESET)

    def with_overrides(self, pairs):
        """Apply ``key=value`` strings; values are parsed as JSON when possible."""
        doc = self.to_dict()
        for pair in pairs:
            if "=" not in pair:
                raise ConfigError(pair, "override must look like key=value")
            key, raw = pair.split("=", 1)
            if key not in doc or key in ("dataset", "models"):
                raise ConfigError(key, "not an overridable config key")
            try:
                value = json.loads(raw)
            except json.JSONDecodeError:
                value = raw
            doc[key] = value
        return ExperimentConfig(**doc)

    @property
    def root(self):
        return Path(self.output) / self.experiment

    @property
    def families(self):
        return [m["family"] for m in self.models]


def validate(doc):
    try:
        jsonschema.validate(doc, config_schema())
    except jsonschema.ValidationError as exc:
        path = ".".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(path, exc.message) from None
    gammas = doc.get("gammas")
    if gammas is not None and list(gammas) != sorted(gammas):
        raise ConfigError("gammas", "must be sorted ascending")
    if gammas is not None and len(set(gammas)) != len(gammas):
        raise ConfigError("gammas", "must not repeat")
    fams = [m["family"] for m in doc["models"]]
    if len(set(fams)) != len(fams):
        raise ConfigError("models", "each family may appear once")


def load_config(path, preset=None):
    """Read a JSON config.

    A relative ``dataset.csv`` resolves against the config's folder; a set
    ``EVALFRL_OUT`` environment variable replaces ``output``.
    """
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError("<root>", f"invalid JSON: {exc}") from None
    if isinstance(doc, dict) and isinstance(doc.get("dataset"), dict) and "csv" in doc["dataset"]:
        csv = Path(doc["dataset"]["csv"])
        if not csv.is_absolute():
            doc["dataset"]["csv"] = str(path.parent / csv)
    if isinstance(doc, dict) and os.environ.get("EVALFRL_OUT"):
        doc["output"] = os.environ["EVALFRL_OUT"]
    return ExperimentConfig.from_dict(doc, preset=preset)


def load_config_dataset(config):
    """Returns ``(Dataset, info)``; ``info`` carries exact informations for synthetic data."""
    ref = config.dataset
    if "synthetic" in ref:
        spec = data.SynthSpec.from_json(dict(ref["synthetic"], name=ref["name"]))
        ds, i_xs, i_xy = data.synth_discrete(spec)
        return ds, {"kind": "synthetic", "exact_I_XS": i_xs, "exact_I_XY": i_xy}
    return data.load_dataset(ref["csv"], ref["schema"], name=ref["name"]), {"kind": "csv"}


def base_spec(model_entry):
    base = dict(model_entry.get("base", {}))
    if model_entry["family"] == "lfr":
        base.setdefault("encoder_widths", [])
    return ModelSpec(family=model_entry["family"], **base)


def search_space(model_entry):
    return model_entry.get("search_space") or DEFAULT_SEARCH_SPACE[model_entry["family"]]


# seeds ----------------------------------------------------------------------

def cell_seed(master, fold, gamma, stage):
    """Stable 31-bit seed from ``(master, fold, gamma, stage)``."""
    key = json.dumps([int(master), fold if fold is None else int(fold),
                      gamma if gamma is None else float(gamma), str(stage)])
    return int.from_bytes(hashlib.sha256(key.encode()).digest()[:8], "big") % (2**31 - 1)


def gamma_label(gamma):
    return f"gamma_{float(gamma):.2f}"


# hyperparameter search ----------------------------------------------------------

def sample_setting(space, rng):
    """One draw from ``space``; keys are visited in sorted order."""
    if not space:
        raise ValueError("search space is empty")
    out = {}
    for key in sorted(space):
        dist = space[key]
        if isinstance(dist, list):
            out[key] = copy.deepcopy(dist[int(rng.integers(len(dist)))])
        elif "choice" in dist:
            out[key] = copy.deepcopy(dist["choice"][int(rng.integers(len(dist["choice"])))])
        elif "uniform" in dist:
            out[key] = float(rng.uniform(*dist["uniform"]))
        elif "log_uniform" in dist:
            lo, hi = np.log(dist["log_uniform"])
            out[key] = float(np.exp(rng.uniform(lo, hi)))
        elif "int" in dist:
            out[key] = int(rng.integers(dist["int"][0], dist["int"][1] + 1))
        else:
            raise ValueError(f"search space entry {key!r} has no known distribution")
    return out


@dataclass
class TuneResult:
    best: dict
    best_auc: float
    trials: list
    fold_seed: int
    rows_seen: np.ndarray


def tune(model_entry, train, fold_seed, n_iter, k):
    """Random search scored by mean k-fold validation AUC at gamma = 0.

    Ties keep the earliest trial. Only rows of ``train`` are ever touched; the
    original row ids that entered any inner fold are returned for auditing.
    """
    space = search_space(model_entry)
    base = base_spec(model_entry)
    rng = np.random.default_rng([int(fold_seed), 0x7e4])
    folds = data.kfold(len(train), k, fold_seed)
    trials, best, best_auc = [], None, -np.inf
    for t in range(n_iter):
        setting = sample_setting(space, rng)
        row = {"trial": t, "params": setting, "val_auc": None, "error": None}
        try:
            spec = base.with_params(**setting, seed=fold_seed)
            aucs = []
            for fit_idx, val_idx in folds:
                model = fit(spec, train.subset(fit_idx), 0.0)
                val = train.subset(val_idx)
                aucs.append(metrics.auc(predict_scores(model, val.features, val.sensitive),
                                        val.labels))
            row["val_auc"] = float(np.mean(aucs))
        except (TrainingDivergence, ValueError, FloatingPointError) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        trials.append(row)
        if row["val_auc"] is not None and row["val_auc"] > best_auc:
            best, best_auc = setting, row["val_auc"]
    if best is None:
        raise TuneError(f"all {n_iter} trials failed (fold seed {fold_seed}, "
                        f"trials {[r['trial'] for r in trials]})")
    seen = np.unique(np.concatenate([train.rows[f] for pair in folds for f in pair]))
    return TuneResult(best, float(best_auc), trials, int(fold_seed), seen)


@dataclass
class SweepCell:
    model: object
    record: metrics.MetricRecord
    train_Z: np.ndarray
    test_Z: np.ndarray
    repr_seed: int


def gamma_sweep(spec, train, test, gammas, fold, master_seed):
    """Refit ``spec`` from its own seed at every gamma and score the test rows."""
    if not len(gammas):
        raise ValueError("gammas must be non-empty")
    cells = []
    for g in gammas:
        try:
            model = fit(spec, train, float(g))
            scores = predict_scores(model, test.features, test.sensitive)
            record = metrics.evaluate(scores, test.labels, test.sensitive, fold=fold, gamma=float(g))
            seed = cell_seed(master_seed, fold, g, "repr")
            train_Z = representations(model, train.features, train.sensitive, seed=seed)
            test_Z = representations(model, test.features, test.sensitive, seed=seed + 1)
        except Exception as exc:
            raise CellError(fold, g, exc) from exc
        cells.append(SweepCell(model, record, train_Z, test_Z, seed))
    return cells


# bootstrap --------------------------------------------------------------------

def bootstrap_bands(values, n_boot=100, seed=0):
    """Mean, variance and the 2.5/97.5 percentiles of ``n_boot`` Normal draws."""
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        raise ValueError("need at least two values for a band")
    mean = float(values.mean())
    var = float(values.var(ddof=1))
    draws = np.random.default_rng(int(seed)).normal(mean, np.sqrt(var), size=int(n_boot))
    lo, hi = np.percentile(draws, [2.5, 97.5])
    return {"mean": mean, "variance": var, "lower": float(lo), "upper": float(hi)}


def _band(values, n_boot, seed):
    values = [v for v in values if v is not None and np.isfinite(v)]
    if len(values) >= 2:
        return bootstrap_bands(values, n_boot, seed)
    mean = float(values[0]) if values else None
    return {"mean": mean, "variance": None, "lower": None, "upper": None}


# io -------------------------------------------------------------------------

def write_json(path, obj):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def write_matrix(path, Z):
    Z = np.asarray(Z, dtype=np.float64)
    lines = [",".join(f"z{j}" for j in range(Z.shape[1]))]
    lines += [",".join("%.17g" % v for v in row) for row in Z]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path):
    return np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2, dtype=np.float64)


def write_csv(path, header, rows):
    def fmt(v):
        if v is None:
            return ""
        if isinstance(v, (float, np.floating)):
            return "%.17g" % v
        return str(v)
    lines = [",".join(header)] + [",".join(fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def _fold_dir(config, family, fold):
    return config.root / family / config.dataset["name"] / f"fold_{fold}"


def _raw_dir(config, fold):
    return config.root / "raw" / config.dataset["name"] / f"fold_{fold}"


def update_manifest(config, stage, failures):
    path = config.root / "failures.json"
    entries = read_json(path) if path.exists() else []
    entries = [e for e in entries if e["stage"] != stage] + failures
    entries.sort(key=lambda e: (e["stage"], e.get("model") or "",
                                -1 if e.get("fold") is None else e["fold"],
                                -1.0 if e.get("gamma") is None else e["gamma"]))
    write_json(path, entries)


def failure_entry(stage, model, fold, gamma, exc):
    return {"stage": stage, "model": model, "fold": fold, "gamma": gamma,
            "error": f"{type(exc).__name__}: {exc}"}


def _map(fn, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


# per-fold data ------------------------------------------------------------------

def fold_data(config, ds, fold):
    """Prepared ``(train, test)`` for repeat ``fold``; scaling is fit on train only."""
    tr, te = data.holdout_indices(len(ds), config.seed, fold)
    train, test = data.preprocess(ds.subset(tr), apply_to=(ds.subset(te),))
    return train, test


# stages -----------------------------------------------------------------------

def prepare(config):
    """Write dataset facts and the per-repeat split row ids."""
    ds, info = load_config_dataset(config)
    info = dict({"name": config.dataset["name"], "n": len(ds),
                 "columns": [c.name for c in ds.columns],
                 "positive_rate": float(np.mean(ds.labels)),
                 "privileged_share": float(np.mean(ds.sensitive))}, **info)
    write_json(config.root / "dataset.json", info)
    for i in range(config.r):
        tr, te = data.holdout_indices(len(ds), config.seed, i)
        write_json(_raw_dir(config, i) / "split.json",
                   {"fold": i, "seed": config.seed, "train": ds.rows[tr].tolist(),
                    "test": ds.rows[te].tolist()})
    return ds, info


def _tune_job(job):
    config, entry, fold = job
    ds, _ = load_config_dataset(config)
    train, _ = fold_data(config, ds, fold)
    fold_seed = cell_seed(config.seed, fold, None, "fold")
    try:
        res = tune(entry, train, fold_seed, config.n_iter, config.k)
    except TuneError as exc:
        return [failure_entry("tune", entry["family"], fold, None, exc)]
    write_json(_fold_dir(config, entry["family"], fold) / "tuning.json",
               {"fold": fold, "fold_seed": res.fold_seed, "best": res.best,
                "best_val_auc": res.best_auc, "trials": res.trials,
                "rows_seen": res.rows_seen.tolist()})
    return []


def tune_stage(config):
    jobs = [(config, entry, i) for entry in config.models for i in range(config.r)]
    failures = [f for fs in _map(_tune_job, jobs, config.workers) for f in fs]
    update_manifest(config, "tune", failures)
    return failures


def _sweep_job(job):
    config, entry, fold = job
    fdir = _fold_dir(config, entry["family"], fold)
    tuning = fdir / "tuning.json"
    if not tuning.exists():
        return [failure_entry("sweep", entry["family"], fold, None,
                         FileNotFoundError(f"{tuning} missing; run tune first"))]
    t = read_json(tuning)
    spec = base_spec(entry).with_params(**t["best"], seed=t["fold_seed"])
    ds, _ = load_config_dataset(config)
    train, test = fold_data(config, ds, fold)
    failures = []
    for g in config.gammas:
        try:
            (cell,) = gamma_sweep(spec, train, test, [g], fold, config.seed)
        except CellError as exc:
            failures.append(failure_entry("sweep", entry["family"], fold, g, exc.__cause__))
            continue
        gdir = fdir / gamma_label(g)
        write_json(gdir / "metrics.json", cell.record.to_dict())
        write_matrix(gdir / "repr_train.csv", cell.train_Z)
        write_matrix(gdir / "repr_test.csv", cell.test_Z)
        write_json(gdir / "representation.json",
                   {"family": entry["family"], "fold": fold, "gamma": float(g),
                    "mode": cell.model.extraction_mode, "seed": cell.repr_seed,
                    "width": int(cell.train_Z.shape[1]), "spec": spec.to_dict(),
                    "loss_trace": [list(p) for p in cell.model.loss_trace]})
    return failures


def sweep_stage(config):
    jobs = [(config, entry, i) for entry in config.models for i in range(config.r)]
    failures = [f for fs in _map(_sweep_job, jobs, config.workers) for f in fs]
    update_manifest(config, "sweep", failures)
    return failures


def _mine_job(job):
    config, family, fold = job
    ds, _ = load_config_dataset(config)
    train, test = fold_data(config, ds, fold)
    failures = []
    if family is None:
        report = miner.mine(train.features, train.sensitive, test.features, test.sensitive,
                            budget=config.budget, seed=cell_seed(config.seed, fold, None, "raw"))
        write_json(_raw_dir(config, fold) / "miner.json", report.to_dict())
        return failures
    for g in config.gammas:
        gdir = _fold_dir(config, family, fold) / gamma_label(g)
        try:
            train_Z = read_matrix(gdir / "repr_train.csv")
            test_Z = read_matrix(gdir / "repr_test.csv")
            report = miner.mine(train_Z, train.sensitive, test_Z, test.sensitive,
                                budget=config.budget, seed=cell_seed(config.seed, fold, g, "mine"))
        except (OSError, ValueError) as exc:
            failures.append(failure_entry("mine", family, fold, g, exc))
            continue
        write_json(gdir / "miner.json", report.to_dict())
    return failures


def mine_stage(config, raw_baseline=True):
    jobs = [(config, fam, i) for fam in config.families for i in range(config.r)]
    if raw_baseline:
        jobs += [(config, None, i) for i in range(config.r)]
    failures = [f for fs in _map(_mine_job, jobs, config.workers) for f in fs]
    update_manifest(config, "mine", failures)
    return failures


@dataclass
class RunArtifacts:
    root: Path
    records: dict = field(default_factory=dict)      # (family, fold, gamma) -> MetricRecord
    miner_reports: dict = field(default_factory=dict)  # (family, fold, gamma) -> MinerReport
    raw_reports: dict = field(default_factory=dict)    # fold -> MinerReport
    best: dict = field(default_factory=dict)         # (family, fold) -> params
    summaries: dict = field(default_factory=dict)    # family -> summary dict
    failures: list = field(default_factory=list)

    def records_for(self, family, gamma=None):
        return [r for (f, _, g), r in sorted(self.records.items())
                if f == family and (gamma is None or g == gamma)]

    def miner_for(self, family, gamma=None):
        return [r for (f, _, g), r in sorted(self.miner_reports.items())
                if f == family and (gamma is None or g == gamma)]


def collect(config):
    """Read every finished cell back from disk."""
    art = RunArtifacts(config.root)
    for i in range(config.r):
        path = _raw_dir(config, i) / "miner.json"
        if path.exists():
            art.raw_reports[i] = miner.MinerReport.from_dict(read_json(path))
    for fam in config.families:
        for i in range(config.r):
            fdir = _fold_dir(config, fam, i)
            if (fdir / "tuning.json").exists():
                art.best[(fam, i)] = read_json(fdir / "tuning.json")["best"]
            for g in config.gammas:
                gdir = fdir / gamma_label(g)
                if (gdir / "metrics.json").exists():
                    art.records[(fam, i, g)] = metrics.MetricRecord(**read_json(gdir / "metrics.json"))
                if (gdir / "miner.json").exists():
                    art.miner_reports[(fam, i, g)] = miner.MinerReport.from_dict(
                        read_json(gdir / "miner.json"))
    path = config.root / "failures.json"
    art.failures = read_json(path) if path.exists() else []
    return art


def _mean(values):
    values = [v for v in values if v is not None and np.isfinite(v)]
    return float(np.mean(values)) if values else None


def report(config):
    """Aggregate cells into summary.json, tradeoff.csv and miner.csv per model."""
    art = collect(config)
    raw = list(art.raw_reports.values())
    raw_acc = _mean([r.test_acc for r in raw])
    raw_auc = _mean([r.test_auc for r in raw])
    for fam in config.families:
        mdir = config.root / fam / config.dataset["name"]
        summary = {"model": fam, "dataset": config.dataset["name"], "r": config.r,
                   "gammas": list(config.gammas),
                   "best": [{"fold": i, "params": art.best.get((fam, i))} for i in range(config.r)],
                   "metrics": {}, "miner": {},
                   "raw_baseline": {"acc": raw_acc, "auc": raw_auc}}
        trade_rows, miner_rows = [], []
        for g in config.gammas:
            recs = art.records_for(fam, g)
            band = {}
            for col in RATE_COLUMNS:
                band[col] = _band([getattr(r, col) for r in recs], config.n_boot,
                                  cell_seed(config.seed, None, g, f"boot:{col}"))
            summary["metrics"][gamma_label(g)] = dict(band, n=len(recs))
            row = [g, len(recs)]
            for col in RATE_COLUMNS:
                b = band[col]
                if col in FLIPPED:
                    row += [None if b["mean"] is None else 1.0 - b["mean"],
                            None if b["upper"] is None else 1.0 - b["upper"],
                            None if b["lower"] is None else 1.0 - b["lower"]]
                else:
                    row += [b["mean"], b["lower"], b["upper"]]
            trade_rows.append(row)

            reps = art.miner_for(fam, g)
            mb = {"acc": _band([r.test_acc for r in reps], config.n_boot,
                               cell_seed(config.seed, None, g, "boot:miner_acc")),
                  "auc": _band([r.test_auc for r in reps], config.n_boot,
                               cell_seed(config.seed, None, g, "boot:miner_auc")),
                  "majority_share": _mean([r.majority_share for r in reps]), "n": len(reps)}
            summary["miner"][gamma_label(g)] = mb
            miner_rows.append([g, len(reps), mb["acc"]["mean"], mb["acc"]["lower"],
                               mb["acc"]["upper"], mb["auc"]["mean"], mb["auc"]["lower"],
                               mb["auc"]["upper"], mb["majority_share"], raw_acc, raw_auc])
        header = ["gamma", "n_folds"]
        for col in RATE_COLUMNS:
            name = f"1-{col}" if col in FLIPPED else col
            header += [name, f"{name}_lo", f"{name}_hi"]
        mdir.mkdir(parents=True, exist_ok=True)
        write_csv(mdir / "tradeoff.csv", header, trade_rows)
        write_csv(mdir / "miner.csv",
                  ["gamma", "n_folds", "miner_acc", "miner_acc_lo", "miner_acc_hi", "miner_auc",
                   "miner_auc_lo", "miner_auc_hi", "majority_share", "raw_acc", "raw_auc"],
                  miner_rows)
        write_json(mdir / "summary.json", summary)
        art.summaries[fam] = summary
    return art


def planned_fits(config):
    """Model fits per family: ``r * n_iter * k`` for tuning and ``r * |gammas|`` for the sweep."""
    per = {"tune": config.r * config.n_iter * config.k, "sweep": config.r * len(config.gammas)}
    return {fam: dict(per) for fam in config.families}


def run_experiment(config):
    """All stages in order; returns the collected artifacts."""
    prepare(config)
    tune_stage(config)
    sweep_stage(config)
    mine_stage(config)
    return report(config)


def index_audit(config):
    """Violations where tuning touched test rows or metrics missed the split; empty means clean."""
    problems = []
    for i in range(config.r):
        split = read_json(_raw_dir(config, i) / "split.json")
        train, test = set(split["train"]), set(split["test"])
        if train & test:
            problems.append(f"fold {i}: train and test overlap")
        for fam in config.families:
            path = _fold_dir(config, fam, i) / "tuning.json"
            if not path.exists():
                continue
            seen = set(read_json(path)["rows_seen"])
            if seen & test:
                problems.append(f"{fam} fold {i}: tuning used {len(seen & test)} test rows")
            if not seen <= train:
                problems.append(f"{fam} fold {i}: tuning used rows outside the train split")
    return problems
