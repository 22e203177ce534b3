"""Network definitions for each model family.

A family knows how to initialise its parameters, build the tradeoff loss on
a batch, score inputs through its sigmoid task head and extract the
representation layer. Parameters live in flat dicts keyed by stable paths
(``enc.0.W``, ``head.b``, ...).
"""
from __future__ import annotations

import numpy as np

from ..numerics import NoiseTape, Tensor, bce_with_logits, concat, dense, glorot_uniform
from ..numerics.autodiff import sigmoid_array
from . import losses


def _add_dense(params, rng, prefix, fan_in, fan_out):
    params[f"{prefix}.W"] = glorot_uniform(rng, fan_in, fan_out)
    params[f"{prefix}.b"] = np.zeros(fan_out)


def _add_stack(params, rng, prefix, widths):
    for i, (a, b) in enumerate(zip(widths[:-1], widths[1:])):
        _add_dense(params, rng, f"{prefix}.{i}", a, b)


def _run_stack(t, prefix, h, n_layers, activation, last_activation=None):
    for i in range(n_layers):
        act = activation if (i < n_layers - 1 or last_activation is None) else last_activation
        h = dense(h, t[f"{prefix}.{i}.W"], t[f"{prefix}.{i}.b"], act)
    return h


def _tensors(params):
    return {k: Tensor(v) for k, v in params.items()}


def _col(s):
    return np.asarray(s, dtype=np.float64).reshape(-1, 1)


class Family:
    name = ""

    def init(self, spec, X, rng):
        raise NotImplementedError

    def terms(self, t, X, y, s, tape):
        """Return ``(L_class, L_fair)`` as Tensors."""
        raise NotImplementedError

    def loss(self, t, X, y, s, gamma, tape):
        l_class, l_fair = self.terms(t, X, y, s, tape)
        return losses.combine(l_class, l_fair, gamma), {"class": l_class, "fair": l_fair}

    def scores(self, params, X, s=None):
        raise NotImplementedError

    def represent(self, params, X, s=None, rng=None):
        raise NotImplementedError


class MLP(Family):
    """Encoder stack, representation layer, sigmoid task head. No fairness term."""

    name = "mlp"

    def __init__(self, spec):
        self.spec = spec
        self.n_enc = len(spec.encoder_widths) + 1

    def init(self, spec, X, rng):
        params = {}
        _add_stack(params, rng, "enc", [X.shape[1], *spec.encoder_widths, spec.rep_width])
        _add_dense(params, rng, "head", spec.rep_width, 1)
        return params

    def encode(self, t, X):
        return _run_stack(t, "enc", Tensor(X), self.n_enc, self.spec.activation)

    def head(self, t, z):
        return dense(z, t["head.W"], t["head.b"])

    def fair_term(self, t, z, s, tape):
        return Tensor(0.0)

    def terms(self, t, X, y, s, tape):
        z = self.encode(t, X)
        l_class = bce_with_logits(self.head(t, z), y)
        return l_class, self.fair_term(t, z, s, tape)

    def scores(self, params, X, s=None):
        t = _tensors(params)
        return sigmoid_array(self.head(t, self.encode(t, X)).data.ravel())

    def represent(self, params, X, s=None, rng=None):
        return self.encode(_tensors(params), X).data


class Debias(MLP):
    """Adversarial head predicting S from the representation through gradient reversal."""

    name = "debias"

    def init(self, spec, X, rng):
        params = super().init(spec, X, rng)
        widths = [spec.rep_width, *spec.setting("adversary_widths"), 1]
        _add_stack(params, rng, "adv", widths)
        return params

    def adversary(self, t, z):
        n = len(self.spec.setting("adversary_widths")) + 1
        return _run_stack(t, "adv", z, n, self.spec.activation, last_activation="identity")

    def fair_term(self, t, z, s, tape):
        return losses.debias_fair_loss(lambda r: self.adversary(t, r), z, s)


class DeepDomainConfusion(MLP):
    """MMD between group-conditional representations."""

    name = "ddc"

    def fair_term(self, t, z, s, tape):
        return losses.ddc_fair_loss(z, s, self.spec.setting("mmd_bandwidth"), tape)


class VFAE(Family):
    """Variational autoencoder conditioned on S with an MMD penalty on the latent sample."""

    name = "vfae"

    def __init__(self, spec):
        self.spec = spec
        self.enc_widths = list(spec.encoder_widths)
        dec = spec.setting("decoder_widths")
        self.dec_widths = list(reversed(self.enc_widths)) if dec is None else list(dec)

    def init(self, spec, X, rng):
        d = X.shape[1]
        m = spec.rep_width
        params = {}
        widths = [d + 1, *self.enc_widths]
        _add_stack(params, rng, "enc", widths)
        _add_dense(params, rng, "mu", widths[-1], m)
        _add_dense(params, rng, "logvar", widths[-1], m)
        _add_stack(params, rng, "dec", [m + 1, *self.dec_widths, d])
        _add_dense(params, rng, "head", m, 1)
        return params

    def posterior(self, t, X, s):
        h = concat([Tensor(X), Tensor(_col(s))], axis=1)
        h = _run_stack(t, "enc", h, len(self.enc_widths), self.spec.activation)
        return dense(h, t["mu.W"], t["mu.b"]), dense(h, t["logvar.W"], t["logvar.b"])

    def decode(self, t, z, s):
        h = concat([z, Tensor(_col(s))], axis=1)
        return _run_stack(t, "dec", h, len(self.dec_widths) + 1, self.spec.activation,
                          last_activation="identity")

    def terms(self, t, X, y, s, tape):
        mu, logvar = self.posterior(t, X, s)
        eps = tape.normal(mu.shape)
        z = mu + (logvar * 0.5).exp() * Tensor(eps)
        recon = self.decode(t, z, s)
        logits = dense(z, t["head.W"], t["head.b"])
        _, l_class, l_fair = losses.vfae_loss(X, y, recon, mu, logvar, z, logits, s, 0.0,
                                              self.spec.setting("mmd_bandwidth"), tape)
        return l_class, l_fair

    def _require_s(self, X, s):
        if s is None:
            raise ValueError("vfae conditions its encoder on s; pass the sensitive attribute")
        return s

    def scores(self, params, X, s=None):
        t = _tensors(params)
        mu, _ = self.posterior(t, X, self._require_s(X, s))
        return sigmoid_array(dense(mu, t["head.W"], t["head.b"]).data.ravel())

    def represent(self, params, X, s=None, rng=None):
        t = _tensors(params)
        mu, logvar = self.posterior(t, X, self._require_s(X, s))
        rng = rng if rng is not None else np.random.default_rng(0)
        return mu.data + np.exp(0.5 * logvar.data) * rng.standard_normal(mu.shape)


class LFR(Family):
    """Prototype memberships as the representation, trained jointly by gradient descent."""

    name = "lfr"

    def __init__(self, spec):
        self.spec = spec

    def init(self, spec, X, rng):
        k = spec.rep_width
        pick = rng.choice(X.shape[0], size=k, replace=X.shape[0] < k)
        return {"prototypes": X[pick] + 0.01 * rng.standard_normal((k, X.shape[1])),
                "head.w": rng.uniform(-0.1, 0.1, size=k)}

    def terms(self, t, X, y, s, tape):
        l_x, l_y, l_z, _ = losses.lfr_losses(X, s, y, t["prototypes"], t["head.w"])
        return l_y + l_x * self.spec.setting("recon_weight"), l_z

    def scores(self, params, X, s=None):
        m = losses.prototype_memberships(X, params["prototypes"]).data
        return sigmoid_array(m @ params["head.w"])

    def represent(self, params, X, s=None, rng=None):
        return losses.prototype_memberships(X, params["prototypes"]).data


class BinaryMI(Family):
    """Stochastic binary layer with a per-unit mutual-information penalty."""

    name = "binary_mi"
    hard = False

    def __init__(self, spec):
        self.spec = spec
        self.n_hidden = len(spec.encoder_widths)

    def init(self, spec, X, rng):
        params = {}
        _add_stack(params, rng, "enc", [X.shape[1], *spec.encoder_widths, spec.rep_width])
        _add_dense(params, rng, "head", spec.rep_width, 1)
        return params

    def probabilities(self, t, X):
        return _run_stack(t, "enc", Tensor(X), self.n_hidden + 1, self.spec.activation,
                          last_activation="sigmoid")

    def binarize(self, p, tape):
        """Straight-through binary units: forward value is 0/1, gradient flows to ``p``."""
        if self.hard:
            offset = tape.remember(lambda: (p.data >= 0.5).astype(np.float64) - p.data)
        else:
            u = tape.uniform(p.shape)
            offset = tape.remember(lambda: (u < p.data).astype(np.float64) - p.data)
        return p + Tensor(offset)

    def terms(self, t, X, y, s, tape):
        p = self.probabilities(t, X)
        b = self.binarize(p, tape)
        l_class = bce_with_logits(dense(b, t["head.W"], t["head.b"]), y)
        return l_class, losses.binary_mi_penalty(p, s)

    def scores(self, params, X, s=None):
        t = _tensors(params)
        p = self.probabilities(t, X).data
        z = (p >= 0.5).astype(np.float64) if self.hard else p
        return sigmoid_array(z @ params["head.W"].T.ravel() + params["head.b"][0])

    def represent(self, params, X, s=None, rng=None):
        p = self.probabilities(_tensors(params), X).data
        if self.hard:
            return (p >= 0.5).astype(np.float64)
        rng = rng if rng is not None else np.random.default_rng(0)
        return (rng.random(p.shape) < p).astype(np.float64)


class DetBinaryMI(BinaryMI):
    """Same parameters as :class:`BinaryMI`; units are thresholded at 0.5 instead of sampled."""

    name = "det_binary_mi"
    hard = True


REGISTRY = {cls.name: cls for cls in (MLP, Debias, DeepDomainConfusion, VFAE, LFR, BinaryMI, DetBinaryMI)}


def build(spec):
    return REGISTRY[spec.family](spec)


def new_tape(seed):
    return NoiseTape(np.random.default_rng([int(seed), 0x7a9e]))
