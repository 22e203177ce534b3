import json

import numpy as np
import pytest

from frl_audit import data, harness, metrics
from frl_audit.models import ModelSpec, fit, predict_scores

from helpers import micro_config, prepared


def doc(**kw):
    d = {"experiment": "e", "dataset": {"name": "toy", "synthetic": {"n": 50, "joint": [[[0.25, 0.25]], [[0.25, 0.25]]]}},
         "models": [{"family": "mlp"}]}
    d.update(kw)
    return d


@pytest.fixture(scope="module")
def micro_run(tmp_path_factory):
    config = micro_config(tmp_path_factory.mktemp("micro"))
    return config, harness.run_experiment(config)


# configuration ------------------------------------------------------------------

def test_defaults_and_desk_preset():
    full = harness.ExperimentConfig(**doc())
    assert (full.r, full.k, full.seed, full.n_iter, full.budget) == (15, 3, 123, 100, 32)
    assert full.gammas == [round(0.1 * i, 1) for i in range(11)]
    desk = harness.ExperimentConfig.desk(**doc())
    assert (desk.r, desk.k, desk.n_iter, desk.budget) == (5, 2, 10, 8)
    assert harness.ExperimentConfig.desk(**doc(r=3)).r == 3


@pytest.mark.parametrize("bad, field", [
    ({"r": 0}, "r"),
    ({"k": 1}, "k"),
    ({"gammas": [0.5, 0.0]}, "gammas"),
    ({"gammas": [0.0, 0.0]}, "gammas"),
    ({"gammas": [1.5]}, "gammas.0"),
    ({"budget": 0}, "budget"),
    ({"experiment": "a b"}, "experiment"),
    ({"models": [{"family": "svm"}]}, "models.0.family"),
    ({"models": [{"family": "mlp"}, {"family": "mlp"}]}, "models"),
    ({"colour": 1}, "<root>"),
])
def test_validation_names_the_field(bad, field):
    with pytest.raises(harness.ConfigError) as err:
        harness.validate(doc(**bad))
    assert err.value.field == field


def test_dataset_needs_exactly_one_source():
    with pytest.raises(harness.ConfigError):
        harness.validate(doc(dataset={"name": "x"}))
    with pytest.raises(harness.ConfigError):
        harness.validate(doc(dataset={"name": "x", "synthetic": {}, "csv": "a.csv", "schema": []}))


def test_overrides():
    c = harness.ExperimentConfig(**doc()).with_overrides(["r=3", "gammas=[0,0.5]", "output=elsewhere"])
    assert c.r == 3 and c.gammas == [0.0, 0.5] and c.output == "elsewhere"
    for bad in (["nope=1"], ["dataset={}"], ["r"], ["r=0"]):
        with pytest.raises(harness.ConfigError):
            harness.ExperimentConfig(**doc()).with_overrides(bad)


def test_load_config_paths_and_env(tmp_path, monkeypatch):
    (tmp_path / "sub").mkdir()
    d = doc(dataset={"name": "c", "csv": "data.csv", "schema": []}, output="mine")
    path = tmp_path / "sub" / "cfg.json"
    path.write_text(json.dumps(d))
    c = harness.load_config(path)
    assert c.dataset["csv"] == str(tmp_path / "sub" / "data.csv")
    assert c.output == "mine"
    monkeypatch.setenv("EVALFRL_OUT", str(tmp_path / "env"))
    assert harness.load_config(path).root == tmp_path / "env" / "e"
    path.write_text("{not json")
    with pytest.raises(harness.ConfigError):
        harness.load_config(path)


# seeds and search ---------------------------------------------------------------

def test_cell_seed_is_pure():
    a = harness.cell_seed(123, 2, 0.5, "repr")
    assert a == harness.cell_seed(123, 2, 0.5, "repr")
    others = {harness.cell_seed(123, 2, 0.6, "repr"), harness.cell_seed(123, 3, 0.5, "repr"),
              harness.cell_seed(124, 2, 0.5, "repr"), harness.cell_seed(123, 2, 0.5, "mine")}
    assert a not in others and len(others) == 4
    assert 0 <= a < 2**31 - 1
    assert harness.cell_seed(1, None, None, "fold") == harness.cell_seed(1, None, None, "fold")


def test_sample_setting_kinds():
    space = {"a": [1, 2], "b": {"choice": ["x"]}, "c": {"uniform": [0, 1]},
             "d": {"log_uniform": [1e-3, 1e-1]}, "e": {"int": [3, 4]}}
    rng = np.random.default_rng(0)
    for _ in range(50):
        s = harness.sample_setting(space, rng)
        assert s["a"] in (1, 2) and s["b"] == "x" and 0 <= s["c"] <= 1
        assert 1e-3 <= s["d"] <= 1e-1 and s["e"] in (3, 4)
    with pytest.raises(ValueError):
        harness.sample_setting({"a": {"beta": [1, 2]}}, rng)
    with pytest.raises(ValueError):
        harness.sample_setting({}, rng)


@pytest.fixture(scope="module")
def separable():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(120, 2))
    y = (X[:, 0] > 0).astype(int)
    return prepared(X, y, rng.integers(0, 2, 120))


def test_tune_single_trial(separable):
    entry = {"family": "mlp", "base": {"epochs": 3}, "search_space": {"lr": {"uniform": [0.01, 0.02]}}}
    res = harness.tune(entry, separable, fold_seed=9, n_iter=1, k=2)
    expect = harness.sample_setting(entry["search_space"], np.random.default_rng([9, 0x7e4]))
    assert res.best == expect and len(res.trials) == 1


def test_tune_one_point_space(separable):
    entry = {"family": "mlp", "base": {"epochs": 2}, "search_space": {"rep_width": [3]}}
    res = harness.tune(entry, separable, fold_seed=1, n_iter=4, k=2)
    assert res.best == {"rep_width": 3} and len(res.trials) == 4


def test_tune_prefers_the_separating_setting(separable):
    # one prototype gives every row the same membership, hence a constant score
    base = {"epochs": 30, "lr": 0.05}
    one = fit(ModelSpec("lfr", encoder_widths=(), rep_width=1, **base), separable, 0.0)
    assert np.ptp(predict_scores(one, separable.features)) == 0.0
    four = fit(ModelSpec("lfr", encoder_widths=(), rep_width=4, **base), separable, 0.0)
    assert metrics.auc(predict_scores(four, separable.features), separable.labels) > 0.9
    entry = {"family": "lfr", "base": base, "search_space": {"rep_width": [1, 4]}}
    # fold seed 0 draws the constant setting first, so the winner has to beat it
    res = harness.tune(entry, separable, fold_seed=0, n_iter=6, k=2)
    assert res.trials[0]["params"] == {"rep_width": 1}
    assert res.best == {"rep_width": 4}
    constant = [t for t in res.trials if t["params"] == {"rep_width": 1}]
    assert constant and all(t["val_auc"] == 0.5 for t in constant)


def test_tune_all_failures(separable):
    bad = separable.subset(np.arange(len(separable)))
    bad.features[:, 0] = np.nan
    entry = {"family": "mlp", "base": {"epochs": 1}, "search_space": {"rep_width": [2]}}
    with pytest.raises(harness.TuneError):
        harness.tune(entry, bad, fold_seed=0, n_iter=2, k=2)


def test_gamma_sweep_counts_and_refit(separable):
    spec = ModelSpec("mlp", encoder_widths=(4,), rep_width=2, epochs=3, seed=5)
    train, test = separable.subset(np.arange(80)), separable.subset(np.arange(80, 120))
    cells = harness.gamma_sweep(spec, train, test, [0.0], fold=0, master_seed=1)
    assert len(cells) == 1
    direct = predict_scores(fit(spec, train, 0.0), test.features)
    again = metrics.evaluate(direct, test.labels, test.sensitive, fold=0, gamma=0.0)
    assert cells[0].record == again
    cells = harness.gamma_sweep(spec, train, test, [0.0, 0.3, 1.0], fold=0, master_seed=1)
    assert [c.record.gamma for c in cells] == [0.0, 0.3, 1.0]
    assert cells[0].record == again
    with pytest.raises(ValueError):
        harness.gamma_sweep(spec, train, test, [], 0, 1)


# bootstrap ---------------------------------------------------------------------

def test_bootstrap_constant_values():
    b = harness.bootstrap_bands([0.3] * 5)
    assert b["upper"] - b["lower"] < 1e-12 and b["mean"] == pytest.approx(0.3)


def test_bootstrap_width_matches_normal_quantiles():
    rng = np.random.default_rng(0)
    ratios = []
    for seed in range(20):
        v = rng.normal(0, 2.0, 30)
        b = harness.bootstrap_bands(v, n_boot=2000, seed=seed)
        ratios.append((b["upper"] - b["lower"]) / np.std(v, ddof=1))
        assert b["variance"] == pytest.approx(np.var(v, ddof=1))
    assert np.mean(ratios) == pytest.approx(2 * 1.959964, rel=0.03)


def test_bootstrap_deterministic_and_needs_two():
    assert harness.bootstrap_bands([1, 2, 4], seed=3) == harness.bootstrap_bands([1, 2, 4], seed=3)
    with pytest.raises(ValueError):
        harness.bootstrap_bands([1.0])


def test_matrix_round_trip(tmp_path):
    Z = np.random.default_rng(0).normal(size=(7, 3)) * 1e-7
    harness.write_matrix(tmp_path / "z.csv", Z)
    assert np.array_equal(harness.read_matrix(tmp_path / "z.csv"), Z)
    assert (tmp_path / "z.csv").read_text().splitlines()[0] == "z0,z1,z2"


# full micro run --------------------------------------------------------------------

def test_micro_counts(micro_run):
    config, art = micro_run
    assert len(art.records) == config.r * len(config.gammas) == 4
    assert len(art.miner_reports) == 4
    assert len(art.raw_reports) == 2
    assert art.failures == []
    assert harness.index_audit(config) == []


def test_micro_outputs(micro_run):
    config, art = micro_run
    mdir = config.root / "debias" / "toy"
    lines = (mdir / "tradeoff.csv").read_text().splitlines()
    assert len(lines) == 1 + len(config.gammas)
    header = lines[0].split(",")
    assert header[:2] == ["gamma", "n_folds"] and "1-y_discrim" in header and "acc_lo" in header
    assert len((mdir / "miner.csv").read_text().splitlines()) == 3
    summary = json.loads((mdir / "summary.json").read_text())
    assert summary["metrics"]["gamma_1.00"]["n"] == 2
    for g in config.gammas:
        gdir = mdir / "fold_0" / harness.gamma_label(g)
        for name in ("metrics.json", "miner.json", "repr_train.csv", "repr_test.csv", "representation.json"):
            assert (gdir / name).exists()
    rep = json.loads((mdir / "fold_0" / "gamma_0.00" / "representation.json").read_text())
    assert rep["mode"] == "deterministic" and rep["width"] == rep["spec"]["rep_width"]
    ds_info = json.loads((config.root / "dataset.json").read_text())
    assert ds_info["exact_I_XS"] == pytest.approx(1.0)


def test_flipped_columns(micro_run):
    config, art = micro_run
    rows = (config.root / "debias" / "toy" / "tradeoff.csv").read_text().splitlines()
    header = rows[0].split(",")
    first = dict(zip(header, rows[1].split(",")))
    recs = art.records_for("debias", 0.0)
    assert float(first["1-y_discrim"]) == pytest.approx(1 - np.mean([r.y_discrim for r in recs]))
    assert float(first["1-y_discrim_lo"]) <= float(first["1-y_discrim"]) <= float(first["1-y_discrim_hi"])


def test_debias_direction_on_micro_data(micro_run):
    _, art = micro_run
    at0 = np.mean([r.y_discrim for r in art.records_for("debias", 0.0)])
    at1 = np.mean([r.y_discrim for r in art.records_for("debias", 1.0)])
    assert at1 <= at0


def test_byte_identical_reruns(micro_run, tmp_path):
    config, _ = micro_run
    other = config.with_overrides([f"output={json.dumps(str(tmp_path))}"])
    harness.run_experiment(other)
    for fold in range(config.r):
        for g in config.gammas:
            rel = f"debias/toy/fold_{fold}/{harness.gamma_label(g)}"
            for name in ("metrics.json", "miner.json", "repr_train.csv"):
                assert (config.root / rel / name).read_bytes() == (other.root / rel / name).read_bytes()


def test_cells_do_not_depend_on_neighbours(micro_run, tmp_path):
    config, _ = micro_run
    alone = config.with_overrides([f"output={json.dumps(str(tmp_path))}", "gammas=[1.0]", "workers=2"])
    harness.run_experiment(alone)
    rel = "debias/toy/fold_1/gamma_1.00"
    for name in ("metrics.json", "miner.json"):
        assert (config.root / rel / name).read_bytes() == (alone.root / rel / name).read_bytes()


def test_fit_count_matches_formula(tmp_path, monkeypatch):
    config = micro_config(tmp_path, families=("mlp", "ddc"))
    calls = []
    real = harness.fit

    def counting(spec, train, gamma):
        calls.append(spec.family)
        return real(spec, train, gamma)

    monkeypatch.setattr(harness, "fit", counting)
    harness.prepare(config)
    harness.tune_stage(config)
    tuned = len(calls)
    harness.sweep_stage(config)
    plan = harness.planned_fits(config)
    assert tuned == sum(p["tune"] for p in plan.values())
    assert len(calls) - tuned == sum(p["sweep"] for p in plan.values())
    assert calls.count("mlp") == plan["mlp"]["tune"] + plan["mlp"]["sweep"]


def test_full_scale_fit_arithmetic():
    plan = harness.planned_fits(harness.ExperimentConfig(**doc()))["mlp"]
    assert plan == {"tune": 4500, "sweep": 165}


def test_partial_failure_keeps_finished_cells(tmp_path, monkeypatch):
    config = micro_config(tmp_path)
    real = harness.fit

    def flaky(spec, train, gamma):
        if gamma == 1.0:
            raise FloatingPointError("boom")
        return real(spec, train, gamma)

    monkeypatch.setattr(harness, "fit", flaky)
    harness.prepare(config)
    harness.tune_stage(config)
    failures = harness.sweep_stage(config)
    assert [(f["fold"], f["gamma"]) for f in failures] == [(0, 1.0), (1, 1.0)]
    assert "boom" in failures[0]["error"]
    root = config.root / "debias" / "toy"
    assert (root / "fold_0" / "gamma_0.00" / "metrics.json").exists()
    assert not (root / "fold_0" / "gamma_1.00").exists()
    manifest = json.loads((config.root / "failures.json").read_text())
    assert len(manifest) == 2 and manifest[0]["stage"] == "sweep"
    mine_failures = harness.mine_stage(config)
    assert len(mine_failures) == 2
    art = harness.report(config)
    assert len(art.records) == 2 and len(art.failures) == 4


def test_index_audit_catches_leaks(tmp_path):
    config = micro_config(tmp_path, r=1)
    harness.prepare(config)
    harness.tune_stage(config)
    assert harness.index_audit(config) == []
    path = config.root / "debias" / "toy" / "fold_0" / "tuning.json"
    tuning = json.loads(path.read_text())
    split = json.loads((config.root / "raw" / "toy" / "fold_0" / "split.json").read_text())
    tuning["rows_seen"].append(split["test"][0])
    path.write_text(json.dumps(tuning))
    problems = harness.index_audit(config)
    assert any("1 test rows" in p for p in problems)


def test_tuning_rows_are_train_rows(micro_run):
    config, _ = micro_run
    ds, _ = harness.load_config_dataset(config)
    for fold in range(config.r):
        tr, te = data.holdout_indices(len(ds), config.seed, fold)
        seen = json.loads((config.root / "debias" / "toy" / f"fold_{fold}" / "tuning.json").read_text())["rows_seen"]
        assert sorted(seen) == sorted(ds.rows[tr].tolist())
