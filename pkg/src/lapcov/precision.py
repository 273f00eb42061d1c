"""Markov-chain structure of the bare Laplace kernel.

In sorted order ``K`` is the covariance of a unit-variance AR(1) chain
``x_k = rho_(k-1) x_(k-1) + e_k`` with innovation variances ``1 - rho^2``,
so ``K^-1`` is tridiagonal and ``log det K = sum log(1 - rho_k^2)``.  These
all diverge when two coordinates coincide, so they refuse ties.
"""
from dataclasses import dataclass

import numpy as np

from ._dense import check_dense
from .errors import SingularityError
from .kernel import SortedView, _columns, as_view

GAP_TOLERANCE = 1e-10


@dataclass(frozen=True, eq=False)
class Ar1Chain:
    rho: np.ndarray
    innovation_var: np.ndarray


@dataclass(frozen=True, eq=False)
class TridiagonalPrecision:
    """Tridiagonal ``K^-1`` in sorted channel order.

    ``main`` has length C, ``off`` length C-1 (symmetric super/sub-diagonal),
    and ``perm`` maps sorted positions back to original channels.
    """

    main: np.ndarray
    off: np.ndarray
    perm: np.ndarray

    def to_dense(self) -> np.ndarray:
        """Assemble ``Q`` in sorted order (oracle/debug use)."""
        c = self.main.shape[0]
        check_dense(c, "TridiagonalPrecision.to_dense")
        q = np.diag(self.main)
        if c > 1:
            q += np.diag(self.off, 1) + np.diag(self.off, -1)
        return q


def _checked_view(a, gap_tolerance) -> SortedView:
    view = as_view(a)
    if view.size > 1:
        k = int(np.argmin(view.gaps))
        if view.gaps[k] <= gap_tolerance:
            i, j = view.perm[k], view.perm[k + 1]
            raise SingularityError(
                f"coordinates {i} and {j} are within {gap_tolerance:g} "
                f"(gap {view.gaps[k]:.3g}); the kernel is singular"
            )
    return view


def ar1_chain(a) -> Ar1Chain:
    view = as_view(a)
    rho = view.rho
    # 1 - exp(-2g) without cancellation for small gaps
    return Ar1Chain(rho, -np.expm1(-2.0 * view.gaps))


def kernel_precision(a, gap_tolerance: float = GAP_TOLERANCE) -> TridiagonalPrecision:
    """Closed-form tridiagonal inverse of ``K(a)`` under the sorting permutation."""
    view = _checked_view(a, gap_tolerance)
    chain = ar1_chain(view)
    rho, q = chain.rho, chain.innovation_var
    # Q = L^T D^-1 L with D = diag(1, q_1, ..., q_(C-1)) and L unit lower bidiagonal
    dinv = np.concatenate(([1.0], 1.0 / q))
    main = dinv.copy()
    main[:-1] += rho * rho * dinv[1:]
    off = -rho * dinv[1:]
    return TridiagonalPrecision(main, off, view.perm)


def kernel_logdet(a, gap_tolerance: float = GAP_TOLERANCE) -> float:
    """``log det K(a) = sum_k log(1 - rho_k^2)``; always <= 0."""
    view = _checked_view(a, gap_tolerance)
    return float(np.sum(np.log(ar1_chain(view).innovation_var)))


def kernel_precision_quadform(a, x, gap_tolerance: float = GAP_TOLERANCE):
    """``x^T K(a)^-1 x`` via the tridiagonal precision (stacked rows allowed)."""
    view = _checked_view(a, gap_tolerance)
    x = np.asarray(x, dtype=np.float64)
    xs = _columns(view, x)
    prec = kernel_precision(view, gap_tolerance)
    val = np.einsum("i,ij->j", prec.main, xs * xs)
    if view.size > 1:
        val += 2.0 * np.einsum("i,ij->j", prec.off, xs[:-1] * xs[1:])
    val = np.maximum(val, 0.0)
    return float(val[0]) if x.ndim == 1 else val
