"""Class-count-weighted running covariance across sequential tasks."""
from dataclasses import dataclass

import numpy as np

from ._dense import check_dense
from .errors import InputError
from .fitting import run_fit
from .model import FeatureBatch, FitConfig, LcmParams, materialize_covariance
from .ssm import sample


@dataclass(frozen=True)
class TaskWeights:
    """``n_old`` classes seen so far, ``n_new`` classes in the incoming task."""

    n_old: int
    n_new: int

    def __post_init__(self):
        for name in ("n_old", "n_new"):
            val = getattr(self, name)
            if not val >= 1:
                raise InputError(f"{name} must be >= 1, got {val}")

    @property
    def fractions(self):
        total = self.n_old + self.n_new
        return self.n_old / total, self.n_new / total


@dataclass(frozen=True)
class Sampled:
    """Refit mode that bridges through model samples instead of dense matrices."""

    n_samples: int
    seed: int = 0


DENSE = "dense"


def aggregate_dense(sigma_old, sigma_new, w: TaskWeights) -> np.ndarray:
    """Convex combination weighted by class counts."""
    sigma_old = np.asarray(sigma_old, dtype=np.float64)
    sigma_new = np.asarray(sigma_new, dtype=np.float64)
    if sigma_old.ndim != 2 or sigma_old.shape[0] != sigma_old.shape[1]:
        raise InputError(f"sigma_old must be square, got shape {sigma_old.shape}")
    if sigma_old.shape != sigma_new.shape:
        raise InputError(f"shape mismatch: {sigma_old.shape} vs {sigma_new.shape}")
    check_dense(sigma_old.shape[0], "aggregate_dense")
    f_old, f_new = w.fractions
    return sigma_old * f_old + sigma_new * f_new


def aggregate_mean(mu_old, mu_new, w: TaskWeights) -> np.ndarray:
    f_old, f_new = w.fractions
    return np.asarray(mu_old) * f_old + np.asarray(mu_new) * f_new


def _pooled_samples(p_old, p_new, w, mode: Sampled) -> FeatureBatch:
    f_old, _ = w.fractions
    n_old = int(round(mode.n_samples * f_old))
    n_new = mode.n_samples - n_old
    seeds = np.random.SeedSequence(mode.seed).spawn(2)
    parts = []
    for p, n, ss in ((p_old, n_old, seeds[0]), (p_new, n_new, seeds[1])):
        if n > 0:
            # draw around zero so the pooled batch carries only the covariance
            parts.append(sample(p.replace(mu=np.zeros(p.dim)), n, ss).data)
    return FeatureBatch(np.vstack(parts)).center()[0]


def aggregate_refit(p_old: LcmParams, p_new: LcmParams, w: TaskWeights,
                    config: FitConfig = None, mode=DENSE, return_result=False):
    """Refit one LCM to the class-count-weighted aggregate of two LCMs.

    ``mode`` is ``"dense"`` (materialise both covariances, fit to their convex
    combination) or a :class:`Sampled` instance (draw from each model in
    proportion to the weights, pool, center and fit the matrix-free objective).
    The fit is warm-started from ``p_old``; the mean is aggregated with the
    same weights.
    """
    if p_old.dim != p_new.dim:
        raise InputError(f"dimension mismatch: {p_old.dim} vs {p_new.dim}")
    mu = aggregate_mean(p_old.mu, p_new.mu, w)
    if mode == DENSE:
        target = aggregate_dense(materialize_covariance(p_old), materialize_covariance(p_new), w)
    elif isinstance(mode, Sampled):
        if mode.n_samples < 2:
            raise InputError("sampled aggregation needs at least 2 samples")
        target = _pooled_samples(p_old, p_new, w, mode)
    else:
        raise InputError(f"unknown aggregation mode {mode!r}")
    result = run_fit(target, config, init=p_old, mu=mu)
    return result if return_result else result.params
