"""Self-checks: vectorised metrics against loop oracles, model gradients against finite differences."""
from __future__ import annotations

import time

import numpy as np

from . import metrics, oracles
from .models import FAMILIES, ModelSpec, build
from .models.families import new_tape
from .numerics import Tensor, bce_with_logits, grad, grad_check, kink_monitor

KINK_MARGIN = 1e-3
# central differences at step 1e-5 carry ~1e-12 of roundoff; nonzero entries below
# this floor cannot be resolved to 1e-4 relative error
GRAD_FLOOR = 1e-7


# metrics --------------------------------------------------------------------

def random_metric_instance(rng, n_min=2, n_max=64):
    """Scores with deliberate ties, labels and groups with both values present."""
    n = int(rng.integers(n_min, n_max + 1))
    scores = rng.random(n)
    if rng.random() < 0.5:
        scores = np.round(scores, int(rng.integers(0, 2)))
    y = rng.integers(0, 2, n)
    s = rng.integers(0, 2, n)
    y[:2] = (0, 1)
    s[:2] = rng.permutation([0, 1])
    return scores, y.astype(np.float64), s


def metric_oracle_suite(n_instances=1000, seed=0):
    """Max |fast - reference| per metric over ``n_instances`` random instances each."""
    rng = np.random.default_rng([int(seed), 0x5e1f])
    worst = {name: 0.0 for name in ("acc", "auc", "y_discrim", "audc", "spd", "delta", "rnd")}
    counts = dict.fromkeys(worst, 0)

    def note(name, a, b):
        worst[name] = max(worst[name], abs(a - b))
        counts[name] += 1

    for _ in range(n_instances):
        scores, y, s = random_metric_instance(rng)
        y_hat = (scores >= 0.5).astype(np.float64)
        sl, yl, hl, gl = scores.tolist(), y.tolist(), y_hat.tolist(), s.tolist()
        note("acc", metrics.y_acc(y_hat, y), oracles.acc_ref(hl, yl))
        note("auc", metrics.auc(scores, y), oracles.auc_ref(sl, yl))
        note("y_discrim", metrics.y_discrim(y_hat, s), oracles.discrim_ref(hl, gl))
        note("audc", metrics.audc(scores, s, 100), oracles.audc_ref(sl, gl, 100))
        note("spd", metrics.spd(y_hat, s), oracles.spd_ref(hl, gl))
        note("delta", metrics.delta(y_hat, y, s), oracles.delta_ref(hl, yl, gl))
    done = 0
    while done < n_instances:
        scores, _, s = random_metric_instance(rng, n_min=10)
        ref = oracles.rnd_ref(scores.tolist(), s.tolist(), 10)
        if ref is None:
            continue
        note("rnd", metrics.rnd(scores, s, 10), ref)
        done += 1
    return worst, counts


# gradients ------------------------------------------------------------------

def micro_spec(rng, family):
    """Random small architecture: widths and batch well inside the 8 / 16 limits."""
    act = str(rng.choice(["tanh", "relu"]))
    settings = {}
    if family == "lfr":
        enc = ()
        settings["recon_weight"] = float(rng.uniform(0.0, 1.0))
    else:
        enc = tuple(int(w) for w in rng.integers(1, 5, size=int(rng.integers(0, 2))))
    if family == "debias":
        settings["adversary_widths"] = [int(rng.integers(1, 5))]
    if family in ("ddc", "vfae") and rng.random() < 0.5:
        settings["mmd_bandwidth"] = float(rng.uniform(0.5, 2.0))
    if family == "vfae" and rng.random() < 0.5:
        settings["decoder_widths"] = [int(rng.integers(1, 5))]
    return ModelSpec(family, encoder_widths=enc, rep_width=int(rng.integers(1, 4)),
                     activation=act, settings=settings, seed=int(rng.integers(2**31 - 1)))


def _debias_reference(fam, base, X, y, s, gamma):
    """Scalar whose gradient at ``base`` is the gradient-reversal game gradient.

    Encoder and task head descend ``(1-g) L_class - g L_fair``; the adversary
    descends ``g L_fair``. Each part freezes the other player's parameters at
    ``base``.
    """
    fixed = {k: Tensor(v) for k, v in base.items()}

    def ref(t):
        enc_moves = {k: (fixed[k] if k.startswith("adv.") else t[k]) for k in t}
        adv_moves = {k: (t[k] if k.startswith("adv.") else fixed[k]) for k in t}
        z1 = fam.encode(enc_moves, X)
        l_class = bce_with_logits(fam.head(enc_moves, z1), y)
        l_fair_enc = bce_with_logits(fam.adversary(enc_moves, z1), s)
        z2 = fam.encode(adv_moves, X)
        l_fair_adv = bce_with_logits(fam.adversary(adv_moves, z2), s)
        return l_class * (1.0 - gamma) - l_fair_enc * gamma + l_fair_adv * gamma

    return ref


def micro_case(rng, family):
    """One well-conditioned micro configuration.

    Points within ``KINK_MARGIN`` of a relu/abs kink, or with a nonzero gradient
    entry below ``GRAD_FLOOR``, are redrawn. Returns
    ``(loss, params, reference, resamples)``.
    """
    resamples = 0
    while True:
        spec = micro_spec(rng, family)
        n = int(rng.integers(4, 17))
        d = int(rng.integers(1, 5))
        X = rng.standard_normal((n, d))
        y = rng.integers(0, 2, n).astype(np.float64)
        s = rng.integers(0, 2, n)
        s[:2] = (0, 1)
        gamma = float(rng.uniform(0.0, 1.0))
        fam = build(spec)
        # jitter off the initialiser: zero biases with balanced labels give exactly-zero
        # gradients whose finite differences are pure roundoff
        params = {k: v + 0.1 * rng.standard_normal(v.shape)
                  for k, v in fam.init(spec, X, rng).items()}
        tape = new_tape(spec.seed).freeze()

        def loss(t, fam=fam, X=X, y=y, s=s, gamma=gamma, tape=tape):
            tape.rewind()
            return fam.loss(t, X, y, s, gamma, tape)

        with kink_monitor() as closest:
            g = grad(loss, params)
        tiny = any(np.any((v != 0) & (np.abs(v) < GRAD_FLOOR)) for v in g.values())
        if closest[0] > KINK_MARGIN and not tiny:
            break
        resamples += 1
    reference = _debias_reference(fam, params, X, y, s, gamma) if family == "debias" else None
    return loss, params, reference, resamples


def gradient_gate(n_configs=1000, seed=0, families=FAMILIES, step=1e-5):
    """Worst grad_check error per family over ``n_configs`` configurations each."""
    out = {}
    for family in families:
        rng = np.random.default_rng([int(seed), FAMILIES.index(family), 0x96])
        worst, resampled = 0.0, 0
        for _ in range(n_configs):
            loss, params, reference, r = micro_case(rng, family)
            resampled += r
            worst = max(worst, grad_check(loss, params, step=step, reference=reference))
        out[family] = {"max_error": worst, "configs": n_configs, "resamples": resampled}
    return out


def run(n_metric=200, n_grad=20, seed=0, echo=print):
    """Quick combined pass; returns True when every check meets its tolerance."""
    ok = True
    t = time.perf_counter()
    worst, counts = metric_oracle_suite(n_metric, seed)
    for name, err in worst.items():
        good = err <= 1e-12
        ok &= good
        echo(f"{'PASS' if good else 'FAIL'} metric {name}: max |diff| {err:.3g} over {counts[name]} instances")
    for family, res in gradient_gate(n_grad, seed).items():
        good = res["max_error"] < 1e-4
        ok &= good
        echo(f"{'PASS' if good else 'FAIL'} grad {family}: max rel err {res['max_error']:.3g} "
             f"over {res['configs']} configs")
    echo(f"selftest finished in {time.perf_counter() - t:.1f}s")
    return ok
