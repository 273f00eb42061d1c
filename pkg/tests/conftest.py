import numpy as np
import pytest

from lapcov import FeatureBatch, LcmParams


def random_params(rng, c, spread=None, mu_scale=1.0):
    """Random LCM with coordinates spread so adjacent correlations vary widely."""
    spread = c / 4.0 if spread is None else spread
    return LcmParams(
        u=rng.normal(size=c),
        w=rng.normal(size=c),
        a=rng.uniform(0.0, spread, size=c),
        mu=mu_scale * rng.normal(size=c),
    )


def random_batch(rng, n, c, scale=1.0):
    return FeatureBatch(scale * rng.normal(size=(n, c)))


def rel_err(x, ref):
    x = np.asarray(x, dtype=float)
    ref = np.asarray(ref, dtype=float)
    return float(np.max(np.abs(x - ref)) / max(np.max(np.abs(ref)), 1e-300))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def clustered_params(seed, c):
    """Strongly correlated LCM with coordinates packed into [0, 2]."""
    rng = np.random.default_rng(seed)
    return LcmParams.from_diagonal(rng.uniform(0.2, 1, c), rng.uniform(0.5, 1.5, c), rng.uniform(0, 2, c))
