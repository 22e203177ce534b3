"""The seven acceptance criteria, each reported as one PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -s`` to see the lines as
they happen; the terminal summary repeats them in order.
"""
import time

import numpy as np
import pytest

from frl_audit import harness, metrics, mi_lab, miner, selftest
from frl_audit.models import FAMILIES

from helpers import biased_doc, micro_config


def test_criterion_1_metric_oracles(acceptance_line):
    t = time.perf_counter()
    worst, counts = selftest.metric_oracle_suite(n_instances=1000, seed=0)
    z = np.linspace(1.0, 0.0, 20)
    pinned = {
        "rnd alternating": (metrics.rnd(z, 1 - np.array([1, 0] * 10)), 0.0),
        "rnd protected last": (metrics.rnd(z, 1 - np.array([0] * 10 + [1] * 10)), 1.0),
        "rnd 7 of top 10": (metrics.rnd(z, 1 - np.array([1] * 7 + [0] * 3 + [1] * 3 + [0] * 7)), 0.4),
        "audc two points": (metrics.audc([1.0, 0.0], [1, 0]), 0.99),
    }
    elapsed = time.perf_counter() - t
    pinned_err = max(abs(got - want) for got, want in pinned.values())
    ok = (max(worst.values()) <= 1e-12 and min(counts.values()) == 1000
          and pinned_err <= 1e-12 and elapsed < 30)
    acceptance_line(1, ok, f"max |fast - oracle| {max(worst.values()):.2g} over "
                           f"{min(counts.values())} instances per metric, pinned err {pinned_err:.2g}, "
                           f"{elapsed:.1f}s")
    assert ok


def test_criterion_2_gradient_gate(acceptance_line):
    t = time.perf_counter()
    res = selftest.gradient_gate(n_configs=1000, seed=0)
    elapsed = time.perf_counter() - t
    worst = max(r["max_error"] for r in res.values())
    ok = worst < 1e-4 and all(r["configs"] == 1000 for r in res.values()) and elapsed < 120
    acceptance_line(2, ok, f"max relative error {worst:.2g} over 1000 configs x {len(res)} "
                           f"families, {elapsed:.1f}s")
    assert ok


def test_criterion_3_injective_stacks(acceptance_line):
    t = time.perf_counter()
    exact, escaped = 0, 0
    worst = 0.0
    for seed in range(20):
        rep = mi_lab.theorem1_battery("tanh", seed=seed, n=500, d=4, alphabet=4, depth=4, bits=(1,))
        assert rep["exact_I_XS"] == pytest.approx(1.0, abs=1e-12)
        worst = max([worst] + [abs(layer["mi_layer"] - rep["mi_input"]) for layer in rep["layers"]])
        exact += rep["all_equal"]
        quantized = max(layer["quantized"]["1"] for layer in rep["layers"])
        escaped += (rep["mi_input"] - quantized >= 0.05 and rep["mi_input"] - rep["bernoulli_mi"] >= 0.05)
    elapsed = time.perf_counter() - t
    ok = exact == 20 and worst < 1e-9 and escaped >= 18 and elapsed < 60
    acceptance_line(3, ok, f"layers equal on {exact}/20 seeds (max gap {worst:.2g} bits); "
                           f"quantized and Bernoulli below by >= 0.05 on {escaped}/20; {elapsed:.1f}s")
    assert ok


@pytest.fixture(scope="module")
def desk_run(tmp_path_factory):
    config = harness.ExperimentConfig.desk(
        experiment="desk", dataset={"name": "biased", "synthetic": biased_doc(2000, 11)},
        models=[{"family": f} for f in FAMILIES], r=5, gammas=[0.0, 0.5, 0.9], budget=16,
        output=str(tmp_path_factory.mktemp("desk")))
    t = time.perf_counter()
    art = harness.run_experiment(config)
    return config, art, time.perf_counter() - t


@pytest.mark.slow
def test_criterion_4_invariance_contrast(desk_run, acceptance_line):
    config, art, elapsed = desk_run
    info = harness.read_json(config.root / "dataset.json")
    debias_auc = {g: np.mean([r.test_auc for r in art.miner_for("debias", g)]) for g in config.gammas}
    bmi = art.miner_for("binary_mi", 0.9)
    bmi_auc = np.mean([r.test_auc for r in bmi])
    bmi_acc = np.mean([r.test_acc for r in bmi])
    share = np.mean([r.majority_share for r in bmi])
    ok = (abs(info["exact_I_XS"] - 1.0) < 0.05 and not art.failures
          and all(len(art.miner_for(f)) == config.r * len(config.gammas) for f in config.families)
          and min(debias_auc.values()) >= 0.75 and bmi_auc <= 0.60
          and abs(bmi_acc - share) <= 0.05 and elapsed < 20 * 60)
    acceptance_line(4, ok, "debias miner AUC " + ", ".join(f"{v:.3f}" for v in debias_auc.values())
                    + f"; binary_mi at 0.9: AUC {bmi_auc:.3f}, ACC {bmi_acc:.3f} vs majority "
                    f"{share:.3f}; run {elapsed:.0f}s")
    assert ok


@pytest.mark.slow
def test_criterion_5_allocation_tradeoff(desk_run, acceptance_line):
    config, art, _ = desk_run
    drops = {}
    for fam in config.families:
        at0 = np.mean([r.y_discrim for r in art.records_for(fam, 0.0)])
        at9 = np.mean([r.y_discrim for r in art.records_for(fam, 0.9)])
        drops[fam] = at0 - at9
    ok = all(d >= 0 for d in drops.values()) and drops["debias"] >= 0.05
    acceptance_line(5, ok, "yDiscrim drop from 0 to 0.9: "
                    + ", ".join(f"{f} {d:+.3f}" for f, d in drops.items()))
    assert ok


def test_criterion_6_pipeline_fidelity(tmp_path, acceptance_line):
    t = time.perf_counter()
    config = micro_config(tmp_path)
    art = harness.run_experiment(config)
    names = ("metrics.json", "miner.json")
    files = sorted(p for name in names for p in config.root.rglob(name))
    first = {p: p.read_bytes() for p in files}
    harness.run_experiment(config)
    second = {p: p.read_bytes() for p in sorted(p for name in names for p in config.root.rglob(name))}
    elapsed = time.perf_counter() - t
    n_cells = config.r * len(config.gammas)
    audit = harness.index_audit(config)
    ok = (len(art.records) == n_cells and len(art.miner_reports) == n_cells
          and not audit and first == second and elapsed < 120)
    acceptance_line(6, ok, f"{len(art.records)} records and {len(art.miner_reports)} miner reports "
                           f"(expected {n_cells}), audit problems {len(audit)}, "
                           f"{len(first)} files byte-identical on rerun: {first == second}, {elapsed:.1f}s")
    assert ok


def test_criterion_7_miner_calibration(acceptance_line):
    t = time.perf_counter()
    aucs = []
    for seed in range(20):
        rng = np.random.default_rng([seed, 99])
        Z, s = rng.normal(size=(500, 4)), rng.integers(0, 2, 500)
        aucs.append(miner.mine(Z[:350], s[:350], Z[350:], s[350:], budget=16, seed=seed).test_auc)
    rng = np.random.default_rng(7)
    s = rng.integers(0, 2, 500)
    Z = np.c_[rng.normal(size=(500, 3)), s]
    decodable = miner.mine(Z[:350], s[:350], Z[350:], s[350:], budget=16, seed=0).test_auc
    elapsed = time.perf_counter() - t
    mean = float(np.mean(aucs))
    ok = 0.47 <= mean <= 0.53 and decodable == 1.0 and elapsed < 300
    acceptance_line(7, ok, f"null AUC mean {mean:.3f} over 20 seeds (range {min(aucs):.3f}-"
                           f"{max(aucs):.3f}); decodable AUC {decodable:.3f}; {elapsed:.1f}s")
    assert ok
