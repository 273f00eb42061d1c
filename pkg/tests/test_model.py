import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lapcov import (
    FeatureBatch,
    InputError,
    LcmParams,
    SizeError,
    dense_cap_set,
    diag_mle,
    empirical_frobenius_sq,
    frobenius_grad,
    frobenius_loss_decomposed,
    frobenius_loss_dense,
    frobenius_value_and_grad,
    materialize_covariance,
)
from lapcov.model import softplus, softplus_grad, softplus_inv
from lapcov.oracle import empirical_cov

from conftest import random_batch, random_params, rel_err


def params_from_d(d, w, a, **kw):
    return LcmParams.from_diagonal(np.asarray(d, float), w, a, **kw)


def test_softplus_roundtrip():
    y = np.array([1e-8, 1e-3, 0.5, 3.0, 40.0])
    np.testing.assert_allclose(softplus(softplus_inv(y)), y, rtol=1e-12)
    u = np.array([-30.0, -1.0, 0.0, 2.0, 50.0])
    h = 1e-6
    np.testing.assert_allclose(softplus_grad(u), (softplus(u + h) - softplus(u - h)) / (2 * h), rtol=1e-6, atol=1e-12)


class TestParams:
    def test_d_positive(self):
        p = LcmParams(u=[-800.0, 0.0], w=[0, 0], a=[0, 1])
        assert np.all(p.d > 0)
        assert p.d[0] == p.eps

    @pytest.mark.parametrize("kw", [dict(eps=0.0), dict(eps=-1.0), dict(w=[1.0]), dict(a=[0.0, np.nan])])
    def test_validation(self, kw):
        base = dict(u=[0.0, 0.0], w=[1.0, 1.0], a=[0.0, 1.0])
        base.update(kw)
        with pytest.raises(InputError):
            LcmParams(**base)

    def test_immutable(self):
        p = LcmParams(u=[0.0], w=[1.0], a=[0.0])
        with pytest.raises(ValueError):
            p.w[0] = 3.0

    def test_vector_roundtrip(self, rng):
        p = random_params(rng, 6)
        q = p.with_vector(p.to_vector())
        for name in ("u", "w", "a", "mu"):
            np.testing.assert_array_equal(getattr(p, name), getattr(q, name))


class TestFeatureBatch:
    def test_center(self, rng):
        b, mean = FeatureBatch(rng.normal(3.0, 2.0, size=(40, 5))).center()
        assert b.centered
        np.testing.assert_allclose(b.data.mean(axis=0), 0.0, atol=1e-14)
        assert mean.shape == (5,)

    def test_centered_flag_checked(self):
        with pytest.raises(InputError):
            FeatureBatch(np.array([[1.0], [2.0]]), centered=True)

    @pytest.mark.parametrize("bad", [np.zeros((0, 3)), np.zeros(3), np.array([[np.inf]])])
    def test_rejects(self, bad):
        with pytest.raises(InputError):
            FeatureBatch(bad)


class TestMaterialize:
    def test_scalar(self):
        p = params_from_d([1.0], [2.0], [0.0])
        np.testing.assert_allclose(materialize_covariance(p), [[5.0]], rtol=1e-14)

    def test_zero_w(self, rng):
        p = random_params(rng, 5).replace(w=np.zeros(5))
        np.testing.assert_array_equal(materialize_covariance(p), np.diag(p.d))

    def test_two_by_two(self):
        p = params_from_d([1.0, 1.0], [1.0, 1.0], [0.0, math.log(2)])
        np.testing.assert_allclose(materialize_covariance(p), [[2, 0.5], [0.5, 2]], rtol=1e-14)

    def test_cap(self):
        with dense_cap_set(3):
            with pytest.raises(SizeError):
                materialize_covariance(LcmParams(np.zeros(4), np.zeros(4), np.zeros(4)))

    def test_diag_and_spd(self, rng):
        for c in (1, 3, 17, 100):
            p = random_params(rng, c)
            s = materialize_covariance(p)
            np.testing.assert_array_equal(s, s.T)
            np.testing.assert_allclose(np.diag(s), p.d + p.w ** 2, rtol=1e-14)
            assert np.linalg.eigvalsh(s).min() >= p.d.min() - 1e-10

    def test_global_sign_flip(self, rng):
        p = random_params(rng, 9)
        np.testing.assert_array_equal(materialize_covariance(p), materialize_covariance(p.replace(w=-p.w)))

    def test_single_sign_flip_changes_offdiagonal(self, rng):
        p = random_params(rng, 4)
        w = p.w.copy()
        w[0] = -w[0]
        s0, s1 = materialize_covariance(p), materialize_covariance(p.replace(w=w))
        np.testing.assert_array_equal(np.diag(s0), np.diag(s1))
        assert not np.allclose(s0[0, 1:], s1[0, 1:])


class TestFrobeniusDense:
    def test_self_distance(self, rng):
        p = random_params(rng, 6)
        assert frobenius_loss_dense(p, materialize_covariance(p)) == 0.0

    def test_identity_vs_two_identity(self):
        p = params_from_d([1.0, 1.0], [0.0, 0.0], [0.0, 1.0])
        assert frobenius_loss_dense(p, 2 * np.eye(2)) == pytest.approx(2.0, rel=1e-12)

    def test_random_elementwise(self, rng):
        p = random_params(rng, 32)
        m = rng.normal(size=(32, 32))
        target = m + m.T
        sigma = materialize_covariance(p)
        expected = sum((sigma[i, j] - target[i, j]) ** 2 for i in range(32) for j in range(32))
        assert frobenius_loss_dense(p, target) == pytest.approx(expected, rel=1e-12)

    def test_rejects_asymmetric(self, rng):
        p = random_params(rng, 3)
        t = np.eye(3)
        t[0, 1] = 1e-6
        with pytest.raises(InputError):
            frobenius_loss_dense(p, t)


class TestFrobeniusDecomposed:
    def test_all_ones_kernel_zero_data(self):
        p = params_from_d([1.0, 1.0], [1.0, 1.0], [0.0, 0.0])
        batch = FeatureBatch(np.zeros((3, 2)), centered=True)
        assert frobenius_loss_decomposed(p, batch) == pytest.approx(10.0, rel=1e-12)

    def test_zero_w_zero_data(self, rng):
        p = random_params(rng, 5).replace(w=np.zeros(5))
        batch = FeatureBatch(np.zeros((2, 5)), centered=True)
        assert frobenius_loss_decomposed(p, batch) == pytest.approx(float(p.d @ p.d), rel=1e-14)

    def test_matches_dense_minus_constant(self, rng):
        p = random_params(rng, 64)
        batch = random_batch(rng, 50, 64).center()[0]
        s = empirical_cov(batch)
        const = float(np.sum(s * s))
        dense = frobenius_loss_dense(p, s)
        assert frobenius_loss_decomposed(p, batch) == pytest.approx(dense - const, rel=1e-8)
        assert empirical_frobenius_sq(batch) == pytest.approx(const, rel=1e-12)

    def test_empirical_frobenius_both_gram_sides(self, rng):
        for n, c in ((5, 40), (40, 5)):
            b = random_batch(rng, n, c).center()[0]
            s = empirical_cov(b)
            assert empirical_frobenius_sq(b, chunk=3) == pytest.approx(float(np.sum(s * s)), rel=1e-12)

    def test_requires_centered(self, rng):
        p = random_params(rng, 3)
        with pytest.raises(InputError):
            frobenius_loss_decomposed(p, random_batch(rng, 4, 3))

    def test_consistency_sweep(self, rng):
        for c in (1, 2, 7, 256):
            p = random_params(rng, c)
            batch = random_batch(rng, 30, c, scale=2.0).center()[0]
            s = empirical_cov(batch)
            lhs = frobenius_loss_decomposed(p, batch) + float(np.sum(s * s))
            assert lhs == pytest.approx(frobenius_loss_dense(p, s), rel=1e-8)


def fd_gradient(loss, p, h=1e-5):
    theta = p.to_vector()
    g = np.empty_like(theta)
    for k in range(theta.size):
        e = np.zeros_like(theta)
        e[k] = h
        g[k] = (loss(p.with_vector(theta + e)) - loss(p.with_vector(theta - e))) / (2 * h)
    return g


def assert_grad_close(g, fd, rtol=1e-5):
    mask = np.abs(g) > 1e-8
    rel = np.abs(g[mask] - fd[mask]) / np.abs(g[mask])
    assert rel.max(initial=0.0) < rtol, rel.max()


class TestFrobeniusGrad:
    def test_zero_data_zero_w(self, rng):
        p = random_params(rng, 4).replace(w=np.zeros(4))
        g = frobenius_grad(p, FeatureBatch(np.zeros((2, 4)), centered=True))
        np.testing.assert_allclose(g.du, 2 * p.d * softplus_grad(p.u), rtol=1e-14)
        np.testing.assert_array_equal(g.dw, 0.0)
        np.testing.assert_array_equal(g.da, 0.0)

    def test_exchange_symmetry(self):
        p = params_from_d([0.7, 0.7], [1.3, 1.3], [0.4, 0.4])
        g = frobenius_grad(p, FeatureBatch(np.zeros((2, 2)), centered=True))
        assert g.da[0] == g.da[1]
        assert g.dw[0] == pytest.approx(g.dw[1], rel=1e-15)

    def test_random_finite_differences(self, rng):
        p = random_params(rng, 32, spread=16.0)
        batch = random_batch(rng, 20, 32).center()[0]
        g = frobenius_grad(p, batch).to_vector()
        fd = fd_gradient(lambda q: frobenius_loss_decomposed(q, batch), p)
        assert_grad_close(g, fd)

    def test_dense_target_gradient(self, rng):
        p = random_params(rng, 12, spread=6.0)
        m = rng.normal(size=(12, 12))
        target = m @ m.T / 12
        _, g = frobenius_value_and_grad(p, target)
        fd = fd_gradient(lambda q: frobenius_loss_dense(q, target), p)
        assert_grad_close(g.to_vector(), fd)

    def test_dense_and_decomposed_gradients_agree(self, rng):
        p = random_params(rng, 10)
        batch = random_batch(rng, 25, 10).center()[0]
        g1 = frobenius_grad(p, batch).to_vector()
        _, g2 = frobenius_value_and_grad(p, empirical_cov(batch))
        np.testing.assert_allclose(g1, g2.to_vector(), rtol=1e-9, atol=1e-11)


class TestDiagMle:
    def test_two_points(self):
        g = diag_mle(FeatureBatch(np.array([[0.0], [2.0]])))
        np.testing.assert_array_equal(g.mu, [1.0])
        np.testing.assert_array_equal(g.var, [1.0])

    def test_constant_column_floor(self):
        g = diag_mle(FeatureBatch(np.array([[3.0, 1.0], [3.0, 2.0], [3.0, 0.0]])), eps=1e-6)
        assert g.var[0] == 1e-6

    def test_needs_two(self):
        with pytest.raises(InputError):
            diag_mle(FeatureBatch(np.ones((1, 3))))

    def test_standard_normal(self):
        rng = np.random.default_rng(7)
        g = diag_mle(FeatureBatch(rng.normal(size=(5000, 6))))
        np.testing.assert_allclose(g.var, 1.0, rtol=0.05)

    def test_nll_matches_scalar_formula(self):
        g = diag_mle(FeatureBatch(np.array([[0.0], [2.0]])))
        # both points are one std away: 0.5*(1 + log 2pi)
        assert g.nll(np.array([[0.0], [2.0]])) == pytest.approx(0.5 * (1 + math.log(2 * math.pi)), rel=1e-14)
