"""
Running covariance across tasks
===============================

When a new task arrives, the stored covariance is blended with the new one in
proportion to class counts and a single LCM is refit to the blend.  For small
C the blend can be materialised; for large C it is bridged through samples.
"""
import numpy as np

import lapcov

rng = np.random.default_rng(16)
c = 16


def random_model():
    return lapcov.LcmParams(rng.normal(size=c), rng.normal(size=c), rng.uniform(0, 3, size=c),
                            mu=rng.normal(size=c))


old, new = random_model(), random_model()
weights = lapcov.TaskWeights(n_old=60, n_new=40)

dense = lapcov.aggregate_refit(old, new, weights, lapcov.FitConfig())
sampled = lapcov.aggregate_refit(old, new, weights, lapcov.FitConfig(), lapcov.Sampled(50_000, seed=0))

target = lapcov.aggregate_dense(lapcov.materialize_covariance(old), lapcov.materialize_covariance(new), weights)


def rel(m):
    return np.linalg.norm(lapcov.materialize_covariance(m) - target) / np.linalg.norm(target)


# a blend of two LCMs is generally not itself an LCM, so both refits keep a
# residual; what matters is that the sampled route lands where the dense one does
print(f"dense refit   rel. error vs blend: {rel(dense):.4f}")
print(f"sampled refit rel. error vs blend: {rel(sampled):.4f}")
gap = np.linalg.norm(lapcov.materialize_covariance(sampled) - lapcov.materialize_covariance(dense))
print(f"dense vs sampled refit: {gap / np.linalg.norm(lapcov.materialize_covariance(dense)):.4f}")
print("aggregated mean matches:", np.allclose(dense.mu, 0.6 * old.mu + 0.4 * new.mu))
