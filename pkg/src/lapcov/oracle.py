"""Dense brute-force references.

Everything here is O(C^2) memory or worse and exists only to check the fast
paths.  All functions respect the repo-wide dense cap.
"""
import numpy as np
from scipy.linalg import solve_triangular

from ._dense import check_dense
from .errors import InputError, NumericalError
from .model import FeatureBatch, LcmParams, materialize_covariance


def dense_matvec(k, x) -> np.ndarray:
    k = np.asarray(k, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    if k.ndim != 2 or k.shape[0] != k.shape[1] or x.shape != (k.shape[1],):
        raise InputError(f"shape mismatch: matrix {k.shape}, vector {x.shape}")
    check_dense(k.shape[0], "dense_matvec")
    return k @ x


def _cholesky(m):
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise InputError(f"expected a square matrix, got shape {m.shape}")
    check_dense(m.shape[0], "cholesky")
    try:
        return np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Cholesky factorisation failed: {exc}") from exc


def dense_logdet(m) -> float:
    chol = _cholesky(m)
    return 2.0 * float(np.sum(np.log(np.diag(chol))))


def dense_solve_quadform(m, x):
    """``x^T M^-1 x`` via one triangular solve; stacked rows give an (N,) array."""
    chol = _cholesky(m)
    x = np.asarray(x, dtype=np.float64)
    z = solve_triangular(chol, x.T, lower=True)
    q = np.sum(z * z, axis=0)
    return float(q) if x.ndim == 1 else q


def dense_nll(p: LcmParams, batch) -> float:
    """Mean Gaussian NLL per sample under ``N(mu, Sigma(p))`` by dense Cholesky."""
    x = batch.data if isinstance(batch, FeatureBatch) else np.asarray(batch, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != p.dim:
        raise InputError(f"batch has shape {x.shape}, model dimension is {p.dim}")
    chol = _cholesky(materialize_covariance(p))
    logdet = 2.0 * float(np.sum(np.log(np.diag(chol))))
    z = solve_triangular(chol, (x - p.mu).T, lower=True)
    maha = np.sum(z * z, axis=0)
    return 0.5 * (logdet + float(np.mean(maha)) + p.dim * np.log(2.0 * np.pi))


def empirical_cov(batch: FeatureBatch) -> np.ndarray:
    """Biased ``(1/N) sum v v^T`` of a centered batch."""
    if not isinstance(batch, FeatureBatch) or not batch.centered:
        raise InputError("empirical_cov needs a centered FeatureBatch")
    check_dense(batch.dim, "empirical_cov")
    v = batch.data
    return v.T @ v / v.shape[0]
