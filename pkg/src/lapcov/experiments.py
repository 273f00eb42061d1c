"""Desk-scale experiments: memory accounting, diagonal-vs-LCM likelihood, scaling."""
import time
from dataclasses import dataclass

import numpy as np

from ._dense import dense_forbidden
from .errors import InputError
from .fitting import run_fit
from .model import FeatureBatch, FitConfig, LcmParams, diag_mle, frobenius_loss_decomposed
from .ssm import gaussian_nll, sample

RESNET34_DIMS = (200704, 100352, 50176, 25088)

MIB = 2 ** 20
GIB = 2 ** 30


@dataclass(frozen=True)
class MemoryRow:
    label: str
    dim: int
    lcm_bytes: int
    dense_bytes: int

    @property
    def savings_ratio(self) -> int:
        return int(round(self.dense_bytes / self.lcm_bytes))


def memory_report(dims, vectors_per_dim=2):
    """Per-layer rows plus a ``Total`` row.

    LCM storage counts ``vectors_per_dim`` float64 vectors of length D; dense
    storage is the float64 upper triangle, ``8 * D * (D + 1) / 2`` bytes.
    """
    rows = []
    for i, dim in enumerate(dims, start=1):
        if int(dim) != dim or dim < 1:
            raise InputError(f"dimensions must be positive integers, got {dim!r}")
        dim = int(dim)
        rows.append(MemoryRow(f"Layer {i}", dim, 8 * vectors_per_dim * dim, 4 * dim * (dim + 1)))
    total = MemoryRow("Total", sum(r.dim for r in rows), sum(r.lcm_bytes for r in rows),
                      sum(r.dense_bytes for r in rows))
    return rows + [total]


def format_memory_report(rows) -> str:
    lines = ["# sizes in MiB / GiB (binary units)",
             "layer,dim,lcm_bytes,dense_bytes,lcm_mib,dense_gib,savings"]
    for r in rows:
        lines.append(f"{r.label},{r.dim},{r.lcm_bytes},{r.dense_bytes},"
                     f"{r.lcm_bytes / MIB:.2f},{r.dense_bytes / GIB:.2f},{r.savings_ratio}")
    return "\n".join(lines)


def planted_params(c, seed, mean_gap=0.25):
    """A strongly correlated random LCM with channels in shuffled latent order."""
    rng = np.random.default_rng(seed)
    gaps = rng.exponential(mean_gap, size=c)
    a = np.cumsum(gaps)[rng.permutation(c)]
    w = rng.uniform(0.8, 1.5, size=c)
    d = rng.uniform(0.05, 0.3, size=c)
    mu = rng.normal(0.0, 1.0, size=c)
    return LcmParams.from_diagonal(d, w, a, mu=mu)


def ar1_params(c, rho):
    """LCM whose covariance is (numerically) the stationary AR(1) matrix ``rho^|i-j|``.

    ``rho == 0`` gives independent unit-variance channels.
    """
    if not 0 <= rho < 1:
        raise InputError(f"AR(1) correlation must lie in [0, 1), got {rho}")
    if rho == 0:
        return LcmParams.from_diagonal(np.ones(c), np.zeros(c), np.arange(c, dtype=float))
    step = -np.log(rho)
    eps = 1e-9
    return LcmParams.from_diagonal(np.full(c, 2 * eps), np.ones(c), step * np.arange(c), eps=eps)


@dataclass
class CompareResult:
    structure: str
    dims: int
    ll_diag: float
    ll_lcm: float
    seed: int

    @property
    def delta(self):
        return self.ll_lcm - self.ll_diag

    def csv_line(self):
        return f"{self.structure},{self.dims},{self.ll_diag:.12g},{self.ll_lcm:.12g},{self.delta:.12g}"


COMPARE_HEADER = "structure,C,ll_diag,ll_lcm,delta"


def compare(dims, n_train, n_test, seed, structure="ar1:0.7", config=None) -> CompareResult:
    """Fit a diagonal MLE and an LCM on synthetic data; score held-out data.

    Log-likelihoods are mean held-out values per sample per dimension
    (nats/dim).  Train and test splits are independent draws from
    ``SeedSequence(seed)``.
    """
    if dims < 1 or n_train < 2 or n_test < 1:
        raise InputError("need dims >= 1, n_train >= 2, n_test >= 1")
    if structure.startswith("ar1:"):
        truth = ar1_params(dims, float(structure[4:]))
    elif structure == "planted":
        truth = planted_params(dims, seed)
    else:
        raise InputError(f"unknown structure {structure!r}")
    s_train, s_test = np.random.SeedSequence(seed).spawn(2)
    train = sample(truth, n_train, s_train)
    test = sample(truth, n_test, s_test)

    diag = diag_mle(train)
    centered, mean = train.center()
    fitted = run_fit(centered, config or FitConfig(seed=seed), mu=mean).params
    ll_diag = -diag.nll(test) / dims
    ll_lcm = -gaussian_nll(fitted, test) / dims
    return CompareResult(structure, dims, ll_diag, ll_lcm, seed)


@dataclass
class BenchRow:
    dim: int
    frobenius_seconds: float
    nll_seconds: float


def _best_time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def growth_exponent(dims, seconds) -> float:
    """Slope of log(time) against log(dim); NaN with fewer than two points."""
    if len(dims) < 2:
        return float("nan")
    return float(np.polyfit(np.log(dims), np.log(seconds), 1)[0])


def bench(dims, n=8, seed=0, repeats=3):
    """Time the matrix-free Frobenius loss and the Kalman NLL across dimensions.

    Runs with the dense cap forced to zero, so any accidental C x C
    allocation raises instead of silently going quadratic.
    """
    dims = [int(c) for c in dims]
    if any(c < 1 for c in dims) or dims != sorted(dims):
        raise InputError("bench dims must be positive and ascending")
    rows = []
    with dense_forbidden():
        for c in dims:
            ss = np.random.SeedSequence([seed, c])
            rng = np.random.default_rng(ss)
            p = LcmParams(rng.normal(size=c), rng.normal(size=c),
                          rng.uniform(0, c / 8.0, size=c), mu=rng.normal(size=c))
            batch = FeatureBatch(rng.normal(size=(n, c)))
            centered = batch.center()[0]
            tf = _best_time(lambda: frobenius_loss_decomposed(p, centered), repeats)
            tn = _best_time(lambda: gaussian_nll(p, batch), repeats)
            rows.append(BenchRow(c, tf, tn))
    return rows
