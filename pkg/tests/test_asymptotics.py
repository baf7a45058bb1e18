import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from confellip.asymptotics import (
    LimitModel,
    asymptotic_ball_volume,
    asymptotic_ellipsoid,
    asymptotic_mse_matrix,
    gaussian_empty_probability,
    gaussian_q_infinity,
    gaussian_volume_moment,
    regularized_schur_logdet,
    residual_covariance,
    schur_logdet,
    solve_lambda0,
    tradeoff_ratio,
)
from confellip.conformal import CalibrationSet, EmptyRegion, corrected_center, fit_ccle
from confellip.errors import DomainError, NoRoot
from confellip.randgen import RngStream, matern_covariance, sample_mvn
from confellip.specfun import MaternParams, chi2_quantile, kummer_1f1, lgamma, unit_ball_volume
from conftest import random_spd

SIGMA = matern_covariance(9, MaternParams(1.5, 1.0, 5.0))
EMPTY_6_3 = 0.022865129967212999  # 30-digit mpmath


class TestLimitEllipsoid:
    def test_radius_at_mean(self):
        model = LimitModel(SIGMA, 6, 14.68, lam=0.1)
        region = asymptotic_ellipsoid(model, np.zeros(6))
        assert region.radius == 14.68

    def test_far_input_empty(self):
        model = LimitModel(SIGMA, 6, gaussian_q_infinity(6, 3, 0.1))
        w, U = np.linalg.eigh(SIGMA[:6, :6])
        x = 2.0 * U[:, 0]
        assert x @ np.linalg.solve(SIGMA[:6, :6], x) > model.q_inf
        assert isinstance(asymptotic_ellipsoid(model, x), EmptyRegion)

    def test_shape_inverse_oracle(self, rng):
        S = random_spd(rng, 5)
        model = LimitModel(S, 2, 3.0, lam=0.3)
        L = np.vstack([np.zeros((2, 3)), np.eye(3)])
        oracle = np.linalg.inv(L.T @ np.linalg.inv(S + 0.3 * np.eye(5)) @ L)
        assert np.max(np.abs(model.shape - oracle)) <= 1e-9

    def test_center(self, rng):
        S = random_spd(rng, 4)
        mean = rng.standard_normal(4)
        model = LimitModel(S, 2, 3.0, mean=mean)
        x = rng.standard_normal(2)
        expected = S[2:, :2] @ np.linalg.solve(S[:2, :2], x - mean[:2]) + mean[2:]
        np.testing.assert_allclose(asymptotic_ellipsoid(model, x).center, expected, atol=1e-12)

    @given(delta=st.floats(0.01, 100.0), seed=st.integers(0, 1000))
    def test_scale_invariance(self, delta, seed):
        rng = np.random.default_rng(seed)
        S = random_spd(rng, 4)
        x = 0.3 * rng.standard_normal(2)
        # same data, dispersion rescaled: the quantile of V^T (delta S)^{-1} V scales by 1/delta
        a = LimitModel(S, 2, 5.0)
        b = LimitModel(delta * S, 2, 5.0 / delta)
        np.testing.assert_allclose(b.radius(x) * b.shape, a.radius(x) * a.shape, rtol=1e-9)

    def test_rejects_negative_quantile(self):
        with pytest.raises(DomainError):
            LimitModel(SIGMA, 6, -1.0)


class TestGaussianClosedForms:
    def test_q_infinity(self):
        assert gaussian_q_infinity(6, 3, 0.1) == pytest.approx(14.683656573259837, rel=1e-10)
        assert gaussian_q_infinity(0, 2, 0.1) == pytest.approx(-2 * math.log(0.1), rel=1e-12)

    def test_q_infinity_decreases_to_zero(self):
        qs = [gaussian_q_infinity(3, 2, a) for a in (0.1, 0.5, 0.9, 0.999, 1 - 1e-9)]
        assert all(a > b for a, b in zip(qs, qs[1:])) and qs[-1] < 1e-3

    @pytest.mark.parametrize("q, expected", [(1, 1.4007), (2, 2.4183), (3, 4.5815)])
    def test_published_moments(self, q, expected):
        assert float(f"{gaussian_volume_moment(SIGMA, 6, 3, 0.1, q):.5g}") == expected

    def test_moments_frozen(self):
        got = [gaussian_volume_moment(SIGMA, 6, 3, 0.1, q) for q in (1, 2, 3)]
        np.testing.assert_allclose(got, [1.4007148088658403, 2.418331729345869, 4.5815499199506675], rtol=1e-11)

    @pytest.mark.parametrize("k, l", [(1, 1), (2, 3), (6, 3), (4, 2)])
    def test_first_moment_p_dimensional_form(self, k, l):
        S = matern_covariance(k + l, MaternParams(2.5, 1.0, 3.0))
        p = k + l
        q_inf = chi2_quantile(p, 0.9)
        det_schur = math.exp(schur_logdet(S, k))
        alt = (2 ** (-k / 2) * math.pi ** (l / 2) / math.exp(lgamma(p / 2 + 1)) * math.sqrt(det_schur)
               * q_inf ** (p / 2) * kummer_1f1(k / 2, p / 2 + 1, -q_inf / 2))
        assert gaussian_volume_moment(S, k, l, 0.1, 1) == pytest.approx(alt, rel=1e-10)

    def test_moment_matches_simulation(self):
        # Limit volume is v_l sqrt(det A) (q_inf - X^T S11^{-1} X)_+^{l/2} with X ~ N(0, S11).
        k, l = 6, 3
        x = sample_mvn(RngStream(5), np.zeros(k), SIGMA[:k, :k], 400_000)
        m = np.einsum("ij,ij->i", x, np.linalg.solve(SIGMA[:k, :k], x.T).T)
        q_inf = gaussian_q_infinity(k, l, 0.1)
        vol = unit_ball_volume(l) * math.exp(0.5 * schur_logdet(SIGMA, k)) * np.clip(q_inf - m, 0, None) ** (l / 2)
        for q in (1, 2):
            se = np.std(vol ** q) / math.sqrt(vol.size)
            assert abs(np.mean(vol ** q) - gaussian_volume_moment(SIGMA, k, l, 0.1, q)) < 4 * se

    def test_moment_vanishes_as_alpha_to_one(self):
        moments = [gaussian_volume_moment(SIGMA, 6, 3, a, 1) for a in (0.5, 0.9, 0.999, 1 - 1e-9)]
        assert all(a > b for a, b in zip(moments, moments[1:])) and moments[-1] < 1e-8

    def test_empty_probability(self):
        assert gaussian_empty_probability(6, 3, 0.1) == pytest.approx(EMPTY_6_3, rel=1e-9)
        q = 14.683656573259837 / 2
        poisson = math.exp(-q) * (1 + q + q * q / 2)
        assert gaussian_empty_probability(6, 3, 0.1) == pytest.approx(poisson, rel=1e-9)

    def test_empty_probability_without_outputs(self):
        assert gaussian_empty_probability(4, 0, 0.07) == 0.07

    @pytest.mark.parametrize("k", [1, 3, 6])
    def test_empty_probability_decreases_with_l(self, k):
        probs = [gaussian_empty_probability(k, l, 0.1) for l in range(1, 6)]
        assert all(a > b for a, b in zip(probs, probs[1:]))

    def test_empty_probability_at_most_alpha(self):
        for k in range(1, 9):
            for l in range(1, 5):
                for a in (0.01, 0.05, 0.1, 0.2):
                    assert 0 <= gaussian_empty_probability(k, l, a) <= a


class TestBallAndTradeoff:
    @pytest.mark.parametrize("q_norm, l, expected", [(4.0, 2, 4 * math.pi), (0.0, 3, 0.0), (1.0, 3, 4 * math.pi / 3)])
    def test_ball_volume(self, q_norm, l, expected):
        assert asymptotic_ball_volume(q_norm, l) == pytest.approx(expected, rel=1e-14)

    def test_ball_volume_negative(self):
        with pytest.raises(DomainError):
            asymptotic_ball_volume(-1.0, 2)

    def test_no_inputs(self, rng):
        res = tradeoff_ratio(random_spd(rng, 3), 0, 3, 0.1)
        assert res.c_alpha == 1.0 and res.bound == pytest.approx(1.0, rel=1e-12)

    def test_block_diagonal(self):
        S = np.diag([1.0, 2.0, 3.0])
        res = tradeoff_ratio(S, 1, 2, 0.1)
        assert res.c_alpha > 1 and res.bound == pytest.approx(res.c_alpha, rel=1e-12)
        assert not res.satisfied

    def test_matern_model_satisfied(self):
        res = tradeoff_ratio(SIGMA, 6, 3, 0.1)
        assert res.satisfied
        assert res.c_alpha == pytest.approx(chi2_quantile(9, 0.9) / chi2_quantile(3, 0.9), rel=1e-12)

    def test_custom_quantile(self):
        res = tradeoff_ratio(SIGMA, 6, 3, 0.1, quantile=lambda d, p: float(d))
        assert res.c_alpha == pytest.approx(3.0)

    @pytest.mark.parametrize("nu, k, l", [(1.5, 6, 3), (0.5, 1, 3), (2.5, 3, 2), (3.5, 4, 3)])
    def test_ellipsoid_beats_ball_when_satisfied(self, nu, k, l):
        # raw outputs as residuals (zero predictor); largest limit ellipsoid is at x = 0
        S = matern_covariance(k + l, MaternParams(nu, 1.0, 5.0))
        assert tradeoff_ratio(S, k, l, 0.1).satisfied
        r = sample_mvn(RngStream(21, k), np.zeros(l), S[k:, k:], 1_000_000)
        q_norm = np.quantile(np.sum(r * r, axis=1), 0.9)
        model = LimitModel(S, k, gaussian_q_infinity(k, l, 0.1))
        largest = asymptotic_ellipsoid(model, np.zeros(k)).volume()
        assert largest <= asymptotic_ball_volume(q_norm, l)
        assert gaussian_volume_moment(S, k, l, 0.1, 1) <= largest


class TestLambda0:
    S2 = np.array([[2.0, 1.0], [1.0, 2.0]])

    def test_quadratic_oracle(self):
        lam0 = solve_lambda0(self.S2, 1, 1, 1.0)
        assert lam0 == pytest.approx(math.sqrt(2) - 1, rel=1e-9)
        value = (2 + lam0) - 1 / (2 + lam0)
        assert value == pytest.approx(2.0, rel=1e-8)

    def test_boundary_root(self):
        c = 2.0 / 1.5  # c^{-1} det(S22) = 1.5 = ratio at lambda = 0
        assert solve_lambda0(self.S2, 1, 1, c) == 0.0

    def test_no_root_below(self):
        with pytest.raises(NoRoot):
            solve_lambda0(self.S2, 1, 1, 2.0)

    def test_monotone_ratio(self, rng):
        S = random_spd(rng, 5)
        vals = [regularized_schur_logdet(S, 2, lam) for lam in np.linspace(0, 10, 60)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_solution_satisfies_equation(self):
        k, l, c = 6, 3, 0.6
        lam0 = solve_lambda0(SIGMA, k, l, c)
        lhs = regularized_schur_logdet(SIGMA, k, lam0)
        rhs = -l * math.log(c) + np.linalg.slogdet(SIGMA[k:, k:])[1]
        assert math.exp(lhs - rhs) == pytest.approx(1.0, abs=1e-8)


class TestMseMatrix:
    def test_zero_ridge_is_schur(self):
        expected = SIGMA[6:, 6:] - SIGMA[6:, :6] @ np.linalg.solve(SIGMA[:6, :6], SIGMA[:6, 6:])
        np.testing.assert_allclose(asymptotic_mse_matrix(SIGMA, 6, 0.0), expected, atol=1e-12)

    def test_uncorrelated_blocks(self, rng):
        S = np.zeros((4, 4))
        S[:2, :2] = random_spd(rng, 2)
        S[2:, 2:] = random_spd(rng, 2)
        for lam in (0.0, 0.5, 3.0):
            np.testing.assert_allclose(asymptotic_mse_matrix(S, 2, lam), S[2:, 2:], atol=1e-12)

    def test_symmetric(self, rng):
        M = asymptotic_mse_matrix(random_spd(rng, 5), 3, 0.7)
        np.testing.assert_array_equal(M, M.T)

    def test_matches_simulated_prediction_error(self):
        k, l, lam, n = 6, 3, 0.01, 10_000
        U = sample_mvn(RngStream(31, 1), np.zeros(9), SIGMA, n)
        calib = CalibrationSet(U[:, :k], U[:, k:])
        fit = fit_ccle(calib, 0.1, lam)
        T = sample_mvn(RngStream(31, 2), np.zeros(9), SIGMA, 20_000)
        pred = (T[:, :k] - fit.stats.x_mean) @ fit.coef.T + fit.stats.r_mean
        np.testing.assert_allclose(corrected_center(calib, T[0, :k], np.zeros(l), lam), pred[0], atol=1e-12)
        mse = np.mean(np.sum((pred - T[:, k:]) ** 2, axis=1))
        assert mse == pytest.approx(np.trace(asymptotic_mse_matrix(SIGMA, k, lam)), rel=0.05)
        # the corrected prediction is unbiased up to Monte Carlo error
        err = pred - T[:, k:]
        assert np.all(np.abs(err.mean(axis=0)) < 4 * err.std(axis=0) / math.sqrt(err.shape[0]) + 0.02)


class TestResidualCovariance:
    def test_transform(self, rng):
        S = random_spd(rng, 4)
        beta = rng.standard_normal((2, 2))
        U = sample_mvn(RngStream(1), np.zeros(4), S, 200_000)
        V = np.hstack([U[:, :2], U[:, 2:] - U[:, :2] @ beta])
        target = residual_covariance(S, beta)
        band = 5 * math.sqrt(2 / V.shape[0]) * np.sqrt(np.outer(np.diag(target), np.diag(target)))
        assert np.all(np.abs(np.cov(V, rowvar=False) - target) <= band)

    def test_schur_invariant(self, rng):
        S = random_spd(rng, 5)
        beta = rng.standard_normal((2, 3))
        assert schur_logdet(residual_covariance(S, beta), 2) == pytest.approx(schur_logdet(S, 2), rel=1e-10)
