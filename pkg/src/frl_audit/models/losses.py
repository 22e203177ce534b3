"""Fairness and task loss terms shared by the model families.

Every function takes Tensors (or arrays) and returns Tensors so the terms can
be combined and differentiated. Group-conditional terms treat ``s`` as a
constant 0/1 vector.
"""
from __future__ import annotations

import math

import numpy as np

from ..numerics import Tensor, bce_with_logits, grl, median_bandwidth, rbf_mmd2, softmax, xlogy_ratio
from ..numerics.autodiff import as_tensor

LN2 = math.log(2.0)


def combine(l_class, l_fair, gamma):
    """``(1 - gamma) * L_class + gamma * L_fair``."""
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    return as_tensor(l_class) * (1.0 - gamma) + as_tensor(l_fair) * gamma


def debias_fair_loss(adv_logits_fn, z, s, lam=1.0):
    """Adversary cross-entropy on ``grl(z)``.

    ``adv_logits_fn`` maps the reversed representation to adversary logits.
    """
    return bce_with_logits(adv_logits_fn(grl(z, lam)), s)


def _split_groups(z, s):
    s = np.asarray(s).ravel()
    return z[s == 0], z[s == 1], bool((s == 0).any()), bool((s == 1).any())


def ddc_fair_loss(z, s, bandwidth=None, tape=None):
    """MMD^2 between the representations of the two groups (0 if one is absent).

    ``bandwidth=None`` uses the median heuristic on the merged batch; the
    bandwidth is a constant with respect to the gradient.
    """
    z = as_tensor(z)
    if z.ndim == 1:
        z = z.reshape(-1, 1)
    z0, z1, has0, has1 = _split_groups(z, s)
    if not (has0 and has1):
        return Tensor(0.0)
    if bandwidth is None:
        make = lambda: median_bandwidth(z.data)
        bandwidth = tape.remember(make) if tape is not None else make()
    return rbf_mmd2(z0, z1, bandwidth)


def gaussian_kl(mu, logvar):
    """Mean over rows of ``KL(N(mu, exp(logvar)) || N(0, I))`` in nats."""
    mu = as_tensor(mu)
    logvar = as_tensor(logvar)
    per = (mu * mu + logvar.exp() - 1.0 - logvar) * 0.5
    return per.sum(axis=1).mean()


def gaussian_nll(x, x_hat):
    """Unit-variance Gaussian reconstruction NLL, constant dropped, mean over rows."""
    diff = as_tensor(x) - x_hat
    return (diff * diff).sum(axis=1).mean() * 0.5


def vfae_loss(x, y, recon, mu, logvar, z, task_logits, s, gamma, bandwidth=None, tape=None):
    """Combined VFAE objective from already computed network outputs.

    ``L_class = recon NLL + KL + task CE``; ``L_fair`` is the MMD between
    the sampled ``z`` of the two groups.
    """
    l_class = gaussian_nll(x, recon) + gaussian_kl(mu, logvar) + bce_with_logits(task_logits, y)
    l_fair = ddc_fair_loss(z, s, bandwidth, tape)
    return combine(l_class, l_fair, gamma), l_class, l_fair


def prototype_memberships(x, prototypes):
    """Softmax over prototypes of the negative squared distance."""
    x = as_tensor(x)
    v = as_tensor(prototypes)
    diff = x.reshape(x.shape[0], 1, x.shape[1]) - v.reshape(1, v.shape[0], v.shape[1])
    return softmax(-(diff * diff).sum(axis=2), axis=1)


def lfr_losses(x, s, y, prototypes, head):
    """Reconstruction, prediction and group-parity losses ``(L_x, L_y, L_z)``.

    Also returns the membership matrix as a fourth element.
    """
    x = as_tensor(x)
    m = prototype_memberships(x, prototypes)
    recon = m @ as_tensor(prototypes)
    diff = x - recon
    l_x = (diff * diff).sum(axis=1).mean()
    l_y = bce_with_logits(m @ as_tensor(head).reshape(-1, 1), y)
    m0, m1, has0, has1 = _split_groups(m, s)
    if has0 and has1:
        l_z = (m1.mean(axis=0) - m0.mean(axis=0)).abs().sum()
    else:
        l_z = Tensor(0.0)
    return l_x, l_y, l_z, m


def binary_mi_penalty(p, s):
    """Sum over binary units of the exact 2x2 mutual information (bits).

    Unit ``j`` fires with probability ``p[:, j]``; the joint of (unit, S) is
    induced by the group means of ``p``.
    """
    p = as_tensor(p)
    if p.ndim == 1:
        p = p.reshape(-1, 1)
    s = np.asarray(s).ravel()
    n = s.size
    q = p.mean(axis=0)
    total = None
    for g in (0, 1):
        mask = s == g
        if not mask.any():
            continue
        w = mask.sum() / n
        qg = p[mask].mean(axis=0)
        term = xlogy_ratio(qg, q) + xlogy_ratio(1.0 - qg, 1.0 - q)
        total = term * w if total is None else total + term * w
    return total.sum() * (1.0 / LN2)
