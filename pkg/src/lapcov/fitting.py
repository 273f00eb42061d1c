"""Full-batch Adam fitting of LCM parameters to a target covariance."""
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, InputError
from .model import (
    DEFAULT_EPS,
    FeatureBatch,
    FitConfig,
    LcmParams,
    _check_symmetric,
    empirical_frobenius_sq,
    frobenius_value_and_grad,
    softplus_inv,
)

log = logging.getLogger(__name__)


class Adam:
    """Adam with bias-corrected moments, operating on a flat parameter vector."""

    def __init__(self, size, lr=0.01, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0

    def step(self, theta, grad):
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1 ** self.t)
        v_hat = self.v / (1 - self.beta2 ** self.t)
        return theta - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def initial_params(variances, seed=0, eps=DEFAULT_EPS, mu=None) -> LcmParams:
    """Start near the diagonal solution.

    ``d`` matches the given variances, ``w = 0.1 * sqrt(var)`` and the
    coordinates are evenly spaced on ``[0, C/8]`` plus ``0.01 * N(0, 1)`` noise
    drawn from ``numpy.random.default_rng(seed)``.
    """
    var = np.asarray(variances, dtype=np.float64)
    c = var.shape[0]
    u = softplus_inv(np.maximum(var - eps, 1e-12))
    w = 0.1 * np.sqrt(np.maximum(var, 0.0))
    rng = np.random.default_rng(seed)
    a = np.linspace(0.0, c / 8.0, c) + 0.01 * rng.standard_normal(c)
    return LcmParams(u, w, a, eps=eps, mu=mu)


@dataclass
class FitResult:
    """Outcome of :func:`run_fit`.

    Losses are full squared Frobenius distances ``||Sigma - S||_F^2`` (the
    constant ``||S||_F^2`` is added back for batch targets). ``losses[0]`` is
    the initial loss and ``losses[k]`` the loss after ``k`` Adam steps.
    """

    params: LcmParams
    losses: list = field(default_factory=list)
    best_epoch: int = 0
    seconds: float = 0.0

    @property
    def initial_loss(self):
        return self.losses[0]

    @property
    def best_loss(self):
        return self.losses[self.best_epoch]


def _target_info(target):
    if isinstance(target, FeatureBatch):
        if target.n < 2:
            raise InputError(f"fitting needs at least 2 samples, got {target.n}")
        if not target.centered:
            raise InputError("batch must be centered (use FeatureBatch.center())")
        var = np.mean(target.data ** 2, axis=0)
        return target, var, empirical_frobenius_sq(target)
    s = np.asarray(target, dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise InputError(f"dense target must be square, got shape {s.shape}")
    s = _check_symmetric(s, s.shape[0])
    return s, np.diag(s).copy(), 0.0


def run_fit(target, config: FitConfig = None, init: LcmParams = None, mu=None) -> FitResult:
    """Fit to a centered :class:`FeatureBatch` or a dense symmetric covariance.

    Batch targets use the decomposed (matrix-free) objective; dense targets use
    direct dense evaluation.  Every epoch is one full-batch Adam step.  The
    best parameters seen, including the initialisation, are returned.
    """
    config = config or FitConfig()
    target, var, const = _target_info(target)
    c = var.shape[0]
    if init is None:
        init = initial_params(var, seed=config.seed, mu=mu)
    elif init.dim != c:
        raise InputError(f"init has dimension {init.dim}, target has {c}")
    elif mu is not None:
        init = init.replace(mu=mu)

    t0 = time.perf_counter()
    opt = Adam(3 * c, config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps)
    theta = init.to_vector()
    best_theta, best_loss, best_epoch = theta, np.inf, 0
    losses = []
    for epoch in range(config.epochs + 1):
        p = init.with_vector(theta)
        # overflow is caught by the finiteness checks below
        with np.errstate(over="ignore", invalid="ignore"):
            loss, grad = frobenius_value_and_grad(p, target)
        loss += const
        if not np.isfinite(loss):
            raise DivergenceError(epoch, loss)
        losses.append(loss)
        if loss < best_loss:
            best_theta, best_loss, best_epoch = theta, loss, epoch
        if epoch == config.epochs:
            break
        g = grad.to_vector()
        if not np.all(np.isfinite(g)):
            raise DivergenceError(epoch, loss)
        theta = opt.step(theta, g)
        if epoch % 50 == 0:
            log.debug("epoch %d loss %.6g", epoch, loss)
    return FitResult(init.with_vector(best_theta), losses, best_epoch, time.perf_counter() - t0)


def fit(target, config: FitConfig = None, init: LcmParams = None, mu=None) -> LcmParams:
    """Fit LCM parameters; see :func:`run_fit` for the details."""
    return run_fit(target, config, init, mu).params
