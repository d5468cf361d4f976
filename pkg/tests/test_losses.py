"""Loss values, analytic gradients vs central differences, invariances."""

import numpy as np
import pytest

from fdgcl.errors import (DegenerateColumnError, DegenerateError, ShapeError,
                          ZeroRowError)
from fdgcl.losses import (barlow_twins, cosmean, dominant_direction,
                          euclidean, regularized_cosmean, vicreg)
from fdgcl.spectral import eigh

FD_STEP = 1e-4
FD_RTOL = 1e-4


def fd_gradients(fn, z1, z2, step=FD_STEP):
    """Central finite differences of fn(z1, z2).value in both arguments."""
    grads = []
    for which in (0, 1):
        z = (z1, z2)[which]
        g = np.zeros_like(z)
        for i in range(z.shape[0]):
            for j in range(z.shape[1]):
                zp = z.copy()
                zp[i, j] += step
                zm = z.copy()
                zm[i, j] -= step
                args_p = (zp, z2) if which == 0 else (z1, zp)
                args_m = (zm, z2) if which == 0 else (z1, zm)
                g[i, j] = (fn(*args_p).value - fn(*args_m).value) / (2 * step)
        grads.append(g)
    return grads


def assert_grads_match(fn, z1, z2, rtol=FD_RTOL):
    out = fn(z1, z2)
    num1, num2 = fd_gradients(fn, z1, z2)
    scale = max(np.abs(num1).max(), np.abs(num2).max(), 1e-12)
    assert np.abs(out.grad1 - num1).max() / scale < rtol
    assert np.abs(out.grad2 - num2).max() / scale < rtol


@pytest.fixture
def pair():
    rng = np.random.default_rng(12)
    return rng.normal(size=(8, 4)), rng.normal(size=(8, 4))


class TestEuclidean:
    def test_identical_views(self, pair):
        z1, _ = pair
        assert euclidean(z1, z1).value == 0.0

    def test_unit_example(self):
        out = euclidean(np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]]))
        assert out.value == pytest.approx(2.0)

    def test_gradients(self, pair):
        assert_grads_match(euclidean, *pair)

    def test_symmetry(self, pair):
        z1, z2 = pair
        assert euclidean(z1, z2).value == pytest.approx(
            euclidean(z2, z1).value)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            euclidean(np.zeros((2, 3)), np.zeros((3, 2)))


class TestCosmean:
    def test_identical_views(self, pair):
        z1, _ = pair
        assert cosmean(z1, z1).value == pytest.approx(0.0, abs=1e-12)

    def test_orthogonal_rows(self):
        z1 = np.array([[1.0, 0.0], [0.0, 2.0]])
        z2 = np.array([[0.0, 3.0], [4.0, 0.0]])
        assert cosmean(z1, z2).value == pytest.approx(1.0)

    def test_row_scale_invariance(self, pair):
        z1, z2 = pair
        scales = np.abs(np.random.default_rng(1).normal(size=(8, 1))) + 0.1
        assert cosmean(z1 * scales, z2).value == pytest.approx(
            cosmean(z1, z2).value, abs=1e-12)

    def test_range(self, pair):
        z1, z2 = pair
        assert 0.0 <= cosmean(z1, z2).value <= 2.0
        assert cosmean(z1, -z1).value == pytest.approx(2.0)

    def test_gradients(self, pair):
        assert_grads_match(cosmean, *pair)

    def test_symmetry(self, pair):
        z1, z2 = pair
        assert cosmean(z1, z2).value == pytest.approx(
            cosmean(z2, z1).value, abs=1e-12)

    def test_zero_row_reports_index(self):
        z1 = np.ones((3, 2))
        z2 = np.ones((3, 2))
        z2[1] = 0.0
        with pytest.raises(ZeroRowError) as err:
            cosmean(z1, z2)
        assert err.value.row == 1


class TestBarlowTwins:
    def test_perfect_correlation_zero_loss(self):
        rng = np.random.default_rng(5)
        # orthogonal standardized columns correlate perfectly with themselves
        z = rng.normal(size=(32, 4))
        zh = (z - z.mean(0)) / z.std(0)
        q, _ = np.linalg.qr(zh)
        z1 = q * np.sqrt(32)  # orthonormal columns scaled to unit variance
        out = barlow_twins(z1, z1.copy(), lambda_bt=0.1)
        assert out.value == pytest.approx(0.0, abs=1e-12)

    def test_lambda_zero_ignores_off_diagonal(self, pair):
        z1, z2 = pair
        out = barlow_twins(z1, z2, lambda_bt=0.0)
        zh1 = (z1 - z1.mean(0)) / z1.std(0)
        zh2 = (z2 - z2.mean(0)) / z2.std(0)
        c = zh1.T @ zh2 / 8
        assert out.value == pytest.approx(((1 - np.diagonal(c)) ** 2).sum())

    def test_gradients(self, pair):
        assert_grads_match(lambda a, b: barlow_twins(a, b, 0.01), *pair,
                           rtol=1e-5)

    def test_constant_column_rejected(self):
        z = np.ones((4, 3))
        with pytest.raises(DegenerateColumnError):
            barlow_twins(z, z)


class TestVicreg:
    def test_aligned_spread_views_zero_loss(self):
        # identical views, per-column std >= eps, orthogonal centered columns
        raw = np.random.default_rng(2).normal(size=(16, 3))
        z = np.linalg.qr(raw - raw.mean(0))[0] * 8.0  # std well above eps=1
        out = vicreg(z, z.copy(), eps=1.0)
        assert out.value == pytest.approx(0.0, abs=1e-10)

    def test_constant_columns_hit_variance_hinge(self):
        z = np.ones((6, 4))
        out = vicreg(z, z.copy(), eta1=1.0, eta2=1.0, eta3=1.0, eps=1.0)
        # hinge contributes eps per column per view, averaged over columns
        assert out.value == pytest.approx(2.0)

    def test_gradients_away_from_kinks(self, pair):
        z1, z2 = pair
        assert_grads_match(lambda a, b: vicreg(a, b, 1.0, 1.0, 1.0, 1.0),
                           z1, z2, rtol=1e-5)

    def test_symmetry(self, pair):
        z1, z2 = pair
        assert vicreg(z1, z2).value == pytest.approx(vicreg(z2, z1).value)


class TestDominantDirection:
    def test_single_active_column(self):
        z = np.zeros((10, 4))
        z[:, 2] = np.arange(10.0)
        d = dominant_direction(z)
        np.testing.assert_allclose(np.abs(d.direction), [0, 0, 1, 0],
                                   atol=1e-10)

    def test_rank_one(self):
        rng = np.random.default_rng(6)
        a = rng.normal(size=10)
        v = np.array([3.0, 4.0, 0.0])
        z = np.outer(a, v)
        d = dominant_direction(z)
        np.testing.assert_allclose(np.abs(d.direction), np.abs(v) / 5.0,
                                   atol=1e-8)
        ac = a - a.mean()
        assert d.rayleigh == pytest.approx((ac @ ac) * 25.0 / 10.0, rel=1e-8)

    def test_matches_dense_eigensolver(self):
        rng = np.random.default_rng(7)
        z = rng.normal(size=(30, 5)) @ np.diag([3.0, 1.0, 0.5, 0.2, 0.1])
        d = dominant_direction(z)
        zc = z - z.mean(0)
        basis = eigh(zc.T @ zc / 30)
        top = basis.eigenvectors[:, -1]
        assert abs(float(top @ d.direction)) > 1.0 - 1e-6

    def test_unit_norm(self):
        rng = np.random.default_rng(8)
        d = dominant_direction(rng.normal(size=(12, 6)))
        assert np.linalg.norm(d.direction) == pytest.approx(1.0, abs=1e-8)

    def test_constant_input_rejected(self):
        with pytest.raises(DegenerateError):
            dominant_direction(np.ones((5, 3)))


class TestRegularizedCosmean:
    def test_eta_zero_equals_cosmean(self, pair):
        z1, z2 = pair
        a = regularized_cosmean(z1, z2, eta=0.0)
        b = cosmean(z1, z2)
        assert a.value == b.value
        np.testing.assert_array_equal(a.grad1, b.grad1)
        np.testing.assert_array_equal(a.grad2, b.grad2)

    def test_identical_views_full_penalty(self, pair):
        z1, _ = pair
        out = regularized_cosmean(z1, z1.copy(), eta=0.3)
        assert out.reg_term == pytest.approx(0.3, abs=1e-8)

    def test_orthogonal_dominant_directions_no_penalty(self):
        rng = np.random.default_rng(9)
        noise = 0.01 * rng.normal(size=(40, 4))
        z1 = noise.copy()
        z1[:, 0] += np.linspace(-3, 3, 40)
        z2 = 0.01 * rng.normal(size=(40, 4))
        z2[:, 1] += np.linspace(-3, 3, 40)
        out = regularized_cosmean(z1 + 1.0, z2 + 1.0, eta=0.5)
        assert out.reg_term < 0.02

    def test_reg_term_bounded(self, pair):
        z1, z2 = pair
        out = regularized_cosmean(z1, z2, eta=0.4)
        assert 0.0 <= out.reg_term <= 0.4

    def test_gradients_flow_through_directions(self, pair):
        z1, z2 = pair
        assert_grads_match(lambda a, b: regularized_cosmean(a, b, eta=0.15),
                           z1, z2)

    def test_stop_gradient_mode_matches_frozen_surrogate(self, pair):
        z1, z2 = pair
        out = regularized_cosmean(z1, z2, eta=0.15,
                                  grad_through_directions=False)
        base = cosmean(z1, z2)
        np.testing.assert_array_equal(out.grad1, base.grad1)
        np.testing.assert_array_equal(out.grad2, base.grad2)
        assert out.value == pytest.approx(base.value + out.reg_term)

    def test_symmetry_of_regularizer(self, pair):
        z1, z2 = pair
        a = regularized_cosmean(z1, z2, eta=0.2)
        b = regularized_cosmean(z2, z1, eta=0.2)
        assert a.reg_term == pytest.approx(b.reg_term, abs=1e-10)
