"""LCM parameterisation and the Frobenius covariance-matching objective.

The covariance is ``Sigma = diag(d) + diag(w) K(a) diag(w)`` with
``d = softplus(u) + eps``.  For a centered batch ``v_1..v_N`` with empirical
covariance ``S = (1/N) sum v_i v_i^T`` the squared Frobenius distance splits as

    ||Sigma - S||_F^2 = model(p) - data(p, v) + ||S||_F^2

    model = ||d||^2 + 2 d.w^2 + (w^2)^T K(2a) (w^2)
    data  = (2/N) sum_i [ d.v_i^2 + (w*v_i)^T K(a) (w*v_i) ]

and both variable parts are kernel quadratic forms, so neither the model nor
the empirical covariance is ever materialised.
"""
from dataclasses import dataclass, replace
from functools import cached_property
from typing import NamedTuple

import numpy as np

from ._dense import check_dense
from .errors import InputError
from .kernel import SortedView, _restore, _strict_sides, as_view, dense_kernel, prefix_suffix

DEFAULT_EPS = 1e-6


def softplus(u):
    return np.logaddexp(0.0, u)


def softplus_grad(u):
    """Derivative of softplus, i.e. the logistic sigmoid."""
    return np.exp(-np.logaddexp(0.0, -np.asarray(u, dtype=np.float64)))


def softplus_inv(y):
    y = np.asarray(y, dtype=np.float64)
    if np.any(y <= 0):
        raise InputError("softplus inverse needs strictly positive input")
    return y + np.log(-np.expm1(-y))


def _vector(x, name, c=None):
    x = np.array(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 1:
        raise InputError(f"{name} must be a non-empty 1-D array, got shape {x.shape}")
    if c is not None and x.shape[0] != c:
        raise InputError(f"{name} has length {x.shape[0]}, expected {c}")
    if not np.all(np.isfinite(x)):
        raise InputError(f"{name} contains non-finite values")
    x.setflags(write=False)
    return x


@dataclass(frozen=True, eq=False)
class LcmParams:
    """Parameters of one Laplace covariance model.

    ``u`` is the raw (pre-softplus) diagonal, ``w`` the per-channel scaling,
    ``a`` the latent coordinates, ``eps`` the diagonal jitter and ``mu`` the
    feature mean.  Arrays are copied and made read-only on construction.
    """

    u: np.ndarray
    w: np.ndarray
    a: np.ndarray
    eps: float = DEFAULT_EPS
    mu: np.ndarray = None

    def __post_init__(self):
        u = _vector(self.u, "u")
        c = u.shape[0]
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "w", _vector(self.w, "w", c))
        object.__setattr__(self, "a", _vector(self.a, "a", c))
        mu = np.zeros(c) if self.mu is None else self.mu
        object.__setattr__(self, "mu", _vector(mu, "mu", c))
        eps = float(self.eps)
        if not (eps > 0 and np.isfinite(eps)):
            raise InputError(f"eps must be a positive finite number, got {self.eps!r}")
        object.__setattr__(self, "eps", eps)

    @classmethod
    def from_diagonal(cls, d, w, a, mu=None, eps=DEFAULT_EPS):
        """Build parameters from the positive diagonal ``d`` (must exceed ``eps``)."""
        d = np.asarray(d, dtype=np.float64)
        if np.any(d <= eps):
            raise InputError("every diagonal entry must exceed eps")
        return cls(softplus_inv(d - eps), w, a, eps=eps, mu=mu)

    @property
    def dim(self) -> int:
        return self.u.shape[0]

    @property
    def d(self) -> np.ndarray:
        return softplus(self.u) + self.eps

    def view(self) -> SortedView:
        return as_view(self.a)

    def replace(self, **changes) -> "LcmParams":
        return replace(self, **changes)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.u, self.w, self.a])

    def with_vector(self, theta) -> "LcmParams":
        c = self.dim
        return replace(self, u=theta[:c], w=theta[c:2 * c], a=theta[2 * c:])


@dataclass(frozen=True, eq=False)
class FeatureBatch:
    """N x C feature matrix; ``centered`` asserts zero column means."""

    data: np.ndarray
    centered: bool = False

    def __post_init__(self):
        x = np.array(self.data, dtype=np.float64)
        if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
            raise InputError(f"feature batch must be a non-empty 2-D array, got shape {x.shape}")
        if not np.all(np.isfinite(x)):
            r, c = np.argwhere(~np.isfinite(x))[0]
            raise InputError(f"non-finite feature at row {r}, column {c}")
        if self.centered:
            mean = x.mean(axis=0)
            tol = 1e-9 * x.std(axis=0) + 64 * np.finfo(float).eps * np.abs(x).max(axis=0)
            if np.any(np.abs(mean) > tol):
                j = int(np.argmax(np.abs(mean) - tol))
                raise InputError(f"batch flagged centered but column {j} has mean {mean[j]!r}")
        x.setflags(write=False)
        object.__setattr__(self, "data", x)
        object.__setattr__(self, "centered", bool(self.centered))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def dim(self) -> int:
        return self.data.shape[1]

    @cached_property
    def columns(self) -> np.ndarray:
        """Channel-major copy, shape (C, N)."""
        cols = np.ascontiguousarray(self.data.T)
        cols.setflags(write=False)
        return cols

    @cached_property
    def column_sq_sums(self) -> np.ndarray:
        return np.einsum("ij,ij->j", self.data, self.data)

    def center(self):
        """Return ``(centered_batch, column_means)``."""
        mean = self.data.mean(axis=0)
        return FeatureBatch(self.data - mean, centered=True), mean


@dataclass(frozen=True)
class DiagonalGaussian:
    mu: np.ndarray
    var: np.ndarray

    def nll(self, batch) -> float:
        """Mean negative log-likelihood per sample."""
        x = _batch_data(batch, self.mu.shape[0])
        z = (x - self.mu) ** 2 / self.var
        return 0.5 * float(np.mean(z.sum(axis=1))) + 0.5 * float(np.sum(np.log(2 * np.pi * self.var)))


@dataclass(frozen=True)
class FitConfig:
    learning_rate: float = 0.01
    epochs: int = 200
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if not self.learning_rate > 0:
            raise InputError(f"learning_rate must be positive, got {self.learning_rate}")
        if int(self.epochs) != self.epochs or self.epochs < 0:
            raise InputError(f"epochs must be a non-negative integer, got {self.epochs}")
        for name in ("adam_beta1", "adam_beta2"):
            b = getattr(self, name)
            if not 0 < b < 1:
                raise InputError(f"{name} must lie in (0, 1), got {b}")
        if not self.adam_eps > 0:
            raise InputError("adam_eps must be positive")


class FrobeniusGrad(NamedTuple):
    du: np.ndarray
    dw: np.ndarray
    da: np.ndarray

    def to_vector(self):
        return np.concatenate([self.du, self.dw, self.da])


def _batch_data(batch, c):
    x = batch.data if isinstance(batch, FeatureBatch) else np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != c:
        raise InputError(f"batch has shape {x.shape}, model dimension is {c}")
    return x


def _centered_batch(p, batch):
    if not isinstance(batch, FeatureBatch):
        raise InputError("expected a FeatureBatch")
    if not batch.centered:
        raise InputError("batch must be centered (use FeatureBatch.center())")
    _batch_data(batch, p.dim)
    return batch


def materialize_covariance(p: LcmParams) -> np.ndarray:
    """Dense ``Sigma``; capped like every quadratic-memory path."""
    check_dense(p.dim, "materialize_covariance")
    sigma = np.outer(p.w, p.w) * dense_kernel(p.a)
    sigma[np.diag_indices(p.dim)] += p.d
    return sigma


def _check_symmetric(s, c):
    s = np.asarray(s, dtype=np.float64)
    if s.shape != (c, c):
        raise InputError(f"target covariance has shape {s.shape}, expected {(c, c)}")
    if not np.all(np.isfinite(s)):
        raise InputError("target covariance has non-finite entries")
    if np.max(np.abs(s - s.T)) > 1e-9 * max(1.0, np.max(np.abs(s))):
        raise InputError("target covariance is not symmetric")
    return s


def _frob_dense(p, target, need_grad):
    sigma = materialize_covariance(p)
    err = sigma - target
    loss = float(np.sum(err * err))
    if not need_grad:
        return loss, None
    k = dense_kernel(p.a)
    ek = err * k
    dd = 2.0 * np.diag(err)
    dw = 4.0 * ek @ p.w
    sgn = np.sign(p.a[:, None] - p.a[None, :])
    da = -4.0 * p.w * ((ek * sgn) @ p.w)
    return loss, FrobeniusGrad(dd * softplus_grad(p.u), dw, da)


def frobenius_loss_dense(p: LcmParams, sigma_hat) -> float:
    """``||Sigma(p) - sigma_hat||_F^2`` by direct dense evaluation."""
    check_dense(p.dim, "frobenius_loss_dense")
    return _frob_dense(p, _check_symmetric(sigma_hat, p.dim), False)[0]


def _frob_decomposed(p, batch, need_grad):
    n = batch.n
    d, w = p.d, p.w
    view = p.view()
    w2 = w * w

    # model term: K(2a) quadratic form in w^2
    view2 = view.scaled(2.0)
    ys = w2[view.perm][:, None]
    l2, r2 = prefix_suffix(view2.rho, ys)
    k2w2 = l2 + ys + r2
    model = float(d @ d + 2.0 * d @ w2 + max(float(ys[:, 0] @ k2w2[:, 0]), 0.0))

    # data term: K(a) quadratic forms in w * v_i, all samples in one sweep
    v2sum = batch.column_sq_sums
    vs = batch.columns[view.perm]
    xs = vs * w[view.perm][:, None]
    left, right = prefix_suffix(view.rho, xs)
    kx = left + xs + right
    data = 2.0 / n * (float(d @ v2sum) + float(np.einsum("ij,ij->", xs, kx)))
    loss = model - data
    if not need_grad:
        return loss, None

    dd = 2.0 * d + 2.0 * w2 - 2.0 / n * v2sum
    dw_data = _restore(view, (vs * kx).sum(axis=1, keepdims=True), 1)
    dw = 4.0 * d * w + 4.0 * w * _restore(view, k2w2, 1) - 4.0 / n * dw_data

    ls2, rs2 = _strict_sides(view2, l2, r2)
    da_model = 2.0 * _restore(view, -2.0 * ys * (ls2 - rs2), 1)
    ls, rs = _strict_sides(view, left, right)
    da_data = _restore(view, (-2.0 * xs * (ls - rs)).sum(axis=1, keepdims=True), 1)
    da = da_model - 2.0 / n * da_data
    return loss, FrobeniusGrad(dd * softplus_grad(p.u), dw, da)


def frobenius_loss_decomposed(p: LcmParams, batch: FeatureBatch) -> float:
    """Frobenius distance to the batch covariance, minus the constant ``||S||_F^2``.

    Costs one sort plus linear sweeps; no C x C buffer is created.
    """
    return _frob_decomposed(p, _centered_batch(p, batch), False)[0]


def frobenius_grad(p: LcmParams, batch: FeatureBatch) -> FrobeniusGrad:
    """Analytic gradient of :func:`frobenius_loss_decomposed` in ``(u, w, a)``."""
    return _frob_decomposed(p, _centered_batch(p, batch), True)[1]


def frobenius_value_and_grad(p: LcmParams, target):
    """Loss and gradient against a centered batch or a dense covariance."""
    if isinstance(target, FeatureBatch):
        return _frob_decomposed(p, _centered_batch(p, target), True)
    return _frob_dense(p, _check_symmetric(target, p.dim), True)


def empirical_frobenius_sq(batch: FeatureBatch, chunk: int = 1024) -> float:
    """``||S||_F^2`` for the biased empirical covariance, in O(min(N, C)) memory rows.

    Uses whichever Gram matrix (C x C or N x N) is smaller, built in row chunks.
    """
    v = batch.data
    n, c = v.shape
    g = v if c <= n else v.T
    total = 0.0
    for start in range(0, g.shape[1], chunk):
        block = g.T[start:start + chunk] @ g
        total += float(np.sum(block * block))
    return total / (n * n)


def diag_mle(batch: FeatureBatch, eps: float = DEFAULT_EPS) -> DiagonalGaussian:
    """Maximum-likelihood independent Gaussian (biased variances, floored at ``eps``)."""
    x = batch.data if isinstance(batch, FeatureBatch) else np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] < 2:
        raise InputError(f"diag_mle needs at least 2 samples, got shape {x.shape}")
    mu = x.mean(axis=0)
    var = np.maximum(np.mean((x - mu) ** 2, axis=0), eps)
    return DiagonalGaussian(mu, var)
