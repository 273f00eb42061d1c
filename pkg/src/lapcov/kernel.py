"""Laplace kernel algebra.

The kernel over scalar coordinates is ``K(a)[i, j] = exp(-|a_i - a_j|)``.
After sorting the coordinates, ``K`` factorises along the chain of adjacent
decay factors ``rho_k = exp(-(a_(k+1) - a_k))``, so a product ``K @ x`` reduces
to one forward (prefix) and one backward (suffix) linear recursion.  The only
super-linear step is the sort, which :class:`SortedView` caches.

Vector arguments may be a single vector of shape ``(C,)`` or a stack of row
vectors of shape ``(N, C)``; stacked inputs are processed in one sweep over
the channels.
"""
from dataclasses import dataclass

import numpy as np

from ._dense import check_dense
from .errors import InputError


@dataclass(frozen=True, eq=False)
class SortedView:
    """Sorted coordinates with adjacent gaps and decay factors.

    Attributes
    ----------
    perm : ndarray of int, shape (C,)
        Stable ascending argsort of the coordinates, ``a[perm] == sorted_a``.
    sorted_a : ndarray, shape (C,)
    gaps : ndarray, shape (C-1,)
        Non-negative adjacent differences of ``sorted_a``.
    rho : ndarray, shape (C-1,)
        ``exp(-gaps)``, each in (0, 1].
    """

    perm: np.ndarray
    sorted_a: np.ndarray
    gaps: np.ndarray
    rho: np.ndarray

    @property
    def size(self) -> int:
        return self.perm.shape[0]

    @property
    def inverse_perm(self) -> np.ndarray:
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.shape[0])
        return inv

    def scaled(self, factor: float) -> "SortedView":
        """View of ``factor * a`` for ``factor > 0``; reuses the permutation."""
        if not factor > 0:
            raise InputError(f"scale factor must be positive, got {factor}")
        gaps = factor * self.gaps
        return SortedView(self.perm, factor * self.sorted_a, gaps, np.exp(-gaps))


def _frozen(arr):
    arr.setflags(write=False)
    return arr


def sorted_view(a) -> SortedView:
    """Sort latent coordinates once; ties keep their original relative order."""
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 1 or a.shape[0] < 1:
        raise InputError(f"coordinates must be a non-empty 1-D array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        bad = int(np.flatnonzero(~np.isfinite(a))[0])
        raise InputError(f"non-finite coordinate at index {bad}: {a[bad]!r}")
    perm = np.argsort(a, kind="stable")
    sa = a[perm]
    gaps = np.diff(sa)
    return SortedView(_frozen(perm), _frozen(sa), _frozen(gaps), _frozen(np.exp(-gaps)))


def as_view(a) -> SortedView:
    return a if isinstance(a, SortedView) else sorted_view(a)


def _columns(view, x, name="x"):
    """Return ``x`` permuted into sorted channel order as a (C, m) array."""
    x = np.asarray(x, dtype=np.float64)
    c = view.size
    if x.ndim not in (1, 2) or x.shape[-1] != c:
        raise InputError(f"{name} must have trailing dimension {c}, got shape {x.shape}")
    if x.ndim == 1:
        return x[view.perm][:, None]
    return np.ascontiguousarray(x.T[view.perm])


def _restore(view, cols, like_ndim):
    out = np.empty_like(cols)
    out[view.perm] = cols
    return out[:, 0] if like_ndim == 1 else out.T


def prefix_suffix(rho, xs):
    """Directional accumulations over sorted channels.

    ``left[i] = sum_{j<i} K[i, j] xs[j]`` and ``right[i] = sum_{j>i} K[i, j] xs[j]``
    for the chain kernel with adjacent factors ``rho``; ``xs`` has shape (C, m).
    """
    c = xs.shape[0]
    left = np.zeros_like(xs)
    right = np.zeros_like(xs)
    r = rho.tolist()
    for i in range(1, c):
        left[i] = r[i - 1] * (left[i - 1] + xs[i - 1])
    for i in range(c - 2, -1, -1):
        right[i] = r[i] * (right[i + 1] + xs[i + 1])
    return left, right


def dense_kernel(a) -> np.ndarray:
    """Materialise ``K(a)``. Small-C oracle / debug path only."""
    a = as_view(a)
    check_dense(a.size, "dense_kernel")
    coords = np.empty(a.size)
    coords[a.perm] = a.sorted_a
    return np.exp(-np.abs(coords[:, None] - coords[None, :]))


def kernel_matvec(a, x) -> np.ndarray:
    """``K(a) @ x`` without forming ``K``; stacked rows give ``x @ K(a)``."""
    view = as_view(a)
    x = np.asarray(x, dtype=np.float64)
    xs = _columns(view, x)
    left, right = prefix_suffix(view.rho, xs)
    return _restore(view, left + xs + right, x.ndim)


def kernel_quadform(a, x):
    """``x^T K(a) x``; a float for one vector, an (N,) array for stacked rows."""
    view = as_view(a)
    x = np.asarray(x, dtype=np.float64)
    xs = _columns(view, x)
    left, right = prefix_suffix(view.rho, xs)
    q = np.maximum(np.einsum("ij,ij->j", xs, left + xs + right), 0.0)
    return float(q[0]) if x.ndim == 1 else q


def _strict_sides(view, left, right):
    # Drop contributions from exactly tied neighbours (sign(0) = 0).
    if not np.any(view.gaps == 0):
        return left, right
    c = view.size
    idx = np.arange(c)
    starts = np.concatenate(([True], view.gaps > 0))
    ends = np.concatenate((view.gaps > 0, [True]))
    first = np.maximum.accumulate(np.where(starts, idx, 0))
    last = np.minimum.accumulate(np.where(ends, idx, c - 1)[::-1])[::-1]
    return left[first], right[last]


def kernel_quadform_grad_a(a, x) -> np.ndarray:
    """Gradient of ``x^T K(a) x`` with respect to the coordinates.

    Uses ``dK_ij/da_i = -sign(a_i - a_j) K_ij`` with ``sign(0) = 0``, so exactly
    tied coordinates receive the symmetric subgradient.  For stacked rows the
    per-row gradients are returned, shape (N, C).
    """
    view = as_view(a)
    x = np.asarray(x, dtype=np.float64)
    xs = _columns(view, x)
    left, right = prefix_suffix(view.rho, xs)
    left, right = _strict_sides(view, left, right)
    return _restore(view, -2.0 * xs * (left - right), x.ndim)
