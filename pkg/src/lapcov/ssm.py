"""Exact Gaussian likelihood of the full LCM covariance via a scalar Kalman filter.

A draw from ``N(mu, Sigma)`` is ``mu + w * z + eta`` with ``z ~ N(0, K(a))`` and
``eta ~ N(0, diag(d))``.  In sorted channel order ``z`` is a unit-variance AR(1)
chain, so the features form a 1-D linear state-space model:

    z_k = phi_k z_(k-1) + e_k,        e_k ~ N(0, 1 - phi_k^2)
    x_k = mu_k + w_k z_k + eta_k,     eta_k ~ N(0, d_k)

with ``phi_k = exp(-(a_(k) - a_(k-1)))`` and a stationary prior ``z_1 ~ N(0, 1)``.
Filtering yields independent innovations ``v_k ~ N(0, S_k)``; the joint NLL
is a sum of scalar terms and ``log det Sigma = sum_k log S_k``.

The variance recursion (``P``, ``S``, gain) does not depend on the data and
is computed once per parameter set; each sample then costs one linear scan.
"""
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .kernel import _columns
from .model import FeatureBatch, LcmParams

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True, eq=False)
class KalmanGains:
    """Data-independent part of the filter, in sorted channel order."""

    perm: np.ndarray
    phi: np.ndarray    # (C,), phi[0] unused (0)
    w: np.ndarray      # (C,), sorted scaling
    s: np.ndarray      # (C,), innovation variances
    gain: np.ndarray   # (C,), Kalman gains


@dataclass(frozen=True, eq=False)
class InnovationSequence:
    """Innovations ``v`` (N x C) and variances ``s`` (C,), both in sorted order."""

    v: np.ndarray
    s: np.ndarray
    perm: np.ndarray


def kalman_gains(p: LcmParams) -> KalmanGains:
    view = p.view()
    perm = view.perm
    w = p.w[perm]
    d = p.d[perm]
    c = p.dim
    phi = np.concatenate(([0.0], view.rho))
    # process noise 1 - phi^2, computed without cancellation
    q = np.concatenate(([1.0], -np.expm1(-2.0 * view.gaps)))
    s = np.empty(c)
    gain = np.empty(c)
    ws, ds, ph, qs = w.tolist(), d.tolist(), phi.tolist(), q.tolist()
    post = 0.0
    for k in range(c):
        pred = ph[k] * ph[k] * post + qs[k]
        sk = ws[k] * ws[k] * pred + ds[k]
        s[k] = sk
        gain[k] = pred * ws[k] / sk
        # (1 - K w) P_pred == P_pred d / S, the latter stays positive
        post = pred * ds[k] / sk
    return KalmanGains(perm, phi, w, s, gain)


def _innovations(gains: KalmanGains, ys):
    """Innovation scan over centered, sorted observations ``ys`` (C x N)."""
    v = np.empty_like(ys)
    m = np.zeros(ys.shape[1])
    phi, w, gain = gains.phi.tolist(), gains.w.tolist(), gains.gain.tolist()
    for k in range(ys.shape[0]):
        pred = phi[k] * m
        vk = ys[k] - w[k] * pred
        v[k] = vk
        m = pred + gain[k] * vk
    return v


def _centered_columns(p, x):
    x = np.asarray(x.data if isinstance(x, FeatureBatch) else x, dtype=np.float64)
    if x.ndim not in (1, 2) or x.shape[-1] != p.dim:
        raise InputError(f"input has shape {x.shape}, model dimension is {p.dim}")
    return x, _columns(p.view(), x - p.mu)


def kalman_innovations(p: LcmParams, batch) -> InnovationSequence:
    """Run the filter over every sample of an (uncentered) batch."""
    x, ys = _centered_columns(p, batch)
    if x.ndim == 1:
        raise InputError("kalman_innovations expects a 2-D batch")
    gains = kalman_gains(p)
    return InnovationSequence(_innovations(gains, ys).T, gains.s, gains.perm)


def lcm_logdet(p: LcmParams) -> float:
    """``log det Sigma(p)`` as the sum of log innovation variances."""
    return float(np.sum(np.log(kalman_gains(p).s)))


def mahalanobis(p: LcmParams, x):
    """``(x - mu)^T Sigma^-1 (x - mu)``; stacked rows give an (N,) array."""
    x, ys = _centered_columns(p, x)
    gains = kalman_gains(p)
    v = _innovations(gains, ys)
    q = np.einsum("kn,k->n", v * v, 1.0 / gains.s)
    return float(q[0]) if x.ndim == 1 else q


def gaussian_nll_per_sample(p: LcmParams, batch) -> np.ndarray:
    x, ys = _centered_columns(p, batch)
    if x.ndim == 1:
        ys = ys.reshape(-1, 1)
    gains = kalman_gains(p)
    v = _innovations(gains, ys)
    quad = np.einsum("kn,k->n", v * v, 1.0 / gains.s)
    return 0.5 * (quad + float(np.sum(np.log(gains.s))) + p.dim * LOG_2PI)


def gaussian_nll(p: LcmParams, batch) -> float:
    """Mean negative log-likelihood per sample under ``N(mu, Sigma(p))``."""
    return float(np.mean(gaussian_nll_per_sample(p, batch)))


def sample(p: LcmParams, n: int, seed: int) -> FeatureBatch:
    """Draw ``n`` samples by running the state-space model forward.

    Randomness comes from ``numpy.random.default_rng(seed)`` (PCG64).  Each
    sample consumes ``2C`` consecutive standard normals (C for the latent
    chain, then C for the channel noise, both in sorted channel order), so
    sample ``i`` does not depend on ``n``.
    """
    if int(n) != n or n < 1:
        raise InputError(f"n must be a positive integer, got {n!r}")
    n = int(n)
    c = p.dim
    view = p.view()
    perm = view.perm
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal((n, 2 * c))
    eps = noise[:, :c].T
    eta = noise[:, c:].T
    phi = view.rho.tolist()
    sq = np.sqrt(-np.expm1(-2.0 * view.gaps)).tolist()
    z = np.empty((c, n))
    z[0] = eps[0]
    for k in range(1, c):
        z[k] = phi[k - 1] * z[k - 1] + sq[k - 1] * eps[k]
    xs = p.mu[perm][:, None] + p.w[perm][:, None] * z + np.sqrt(p.d[perm])[:, None] * eta
    out = np.empty((n, c))
    out[:, perm] = xs.T
    return FeatureBatch(out)
