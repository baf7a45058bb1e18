import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from confellip.errors import DomainError, UnsupportedSmoothness
from confellip.linalg import spd_factorize
from confellip.randgen import matern_covariance
from confellip.specfun import (
    MaternParams,
    beta,
    chi2_cdf,
    chi2_quantile,
    kummer_1f1,
    lgamma,
    matern_kernel,
    reg_lower_gamma,
    unit_ball_volume,
)

# Frozen from 30-digit mpmath evaluations.
CHI2_9_Q90 = 14.683656573259837
CHI2_1_Q95 = 3.8414588206941260
KUMMER_GOLDEN = [
    ((1.0, 2.0, -2.0), 0.43233235838169365),
    ((3.0, 9.5, -7.34), 0.15682504998601404),
    ((0.5, 2.5, 10.0), 187.97804552711258),
    ((2.0, 3.5, -30.0), 0.0040240458284276052),
]
MATERN_GOLDEN = [
    ((1.5, 1.0, 5.0, 5.0), 0.48335772459650765),
    ((2.5, 1.0, 5.0, 2.0), 0.88354532941287657),
    ((0.5, 1.0, 5.0, 3.0), 0.54881163609402643),
    ((3.5, 1.0, 2.0, 1.0), 0.84630806655334028),
]


class TestGamma:
    @pytest.mark.parametrize("x, expected", [
        (1.0, 0.0),
        (5.0, math.log(24.0)),
        (0.5, 0.57236494292470008),
        (4.5, 2.4537365708424422),
    ])
    def test_lgamma(self, x, expected):
        assert lgamma(x) == pytest.approx(expected, abs=1e-13)

    @pytest.mark.parametrize("x", [0.0, -1.0, float("nan")])
    def test_lgamma_domain(self, x):
        with pytest.raises(DomainError):
            lgamma(x)

    def test_beta(self):
        assert beta(3.0, 2.5) == pytest.approx(0.050793650793650794, rel=1e-13)

    @given(x=st.floats(1e-3, 170.0))
    def test_lgamma_against_mpmath(self, x):
        assert lgamma(x) == pytest.approx(float(mpmath.loggamma(x)), rel=1e-13, abs=1e-13)

    @pytest.mark.parametrize("l, expected", [(0, 1.0), (1, 2.0), (2, math.pi), (3, 4 * math.pi / 3),
                                             (5, 5.2637890139143246)])
    def test_unit_ball_volume(self, l, expected):
        assert unit_ball_volume(l) == pytest.approx(expected, rel=1e-13)

    def test_reg_lower_gamma_examples(self):
        assert reg_lower_gamma(2.0, 0.0) == 0.0
        assert reg_lower_gamma(1.0, 1.0) == pytest.approx(1 - math.exp(-1), abs=1e-14)
        x = 7.34
        assert reg_lower_gamma(3.0, x) == pytest.approx(1 - math.exp(-x) * (1 + x + x * x / 2), abs=1e-14)
        assert reg_lower_gamma(3.0, x) == pytest.approx(0.97710292553223682, abs=1e-13)

    def test_reg_lower_gamma_domain(self):
        with pytest.raises(DomainError):
            reg_lower_gamma(0.0, 1.0)
        with pytest.raises(DomainError):
            reg_lower_gamma(1.0, -1.0)


class TestChi2Quantile:
    def test_zero_probability(self):
        assert chi2_quantile(7, 0.0) == 0.0

    def test_two_dof_closed_form(self):
        assert chi2_quantile(2, 0.9) == pytest.approx(-2 * math.log(0.1), rel=1e-12)

    def test_golden(self):
        assert chi2_quantile(9, 0.9) == pytest.approx(CHI2_9_Q90, rel=1e-10)
        assert chi2_quantile(1, 0.95) == pytest.approx(CHI2_1_Q95, rel=1e-10)

    @pytest.mark.parametrize("p", [1.0, -0.1, 1.5])
    def test_domain(self, p):
        with pytest.raises(DomainError):
            chi2_quantile(3, p)

    @given(m=st.integers(1, 20), x=st.floats(0.01, 100.0))
    def test_round_trip(self, m, x):
        p = chi2_cdf(m, x)
        if p >= 1.0 - 1e-12:
            return  # quantile is not identifiable in double precision
        assert chi2_quantile(m, p) == pytest.approx(x, abs=1e-8 * max(1.0, x) / max(1e-3, 1 - p))

    def test_monotone_in_p(self):
        qs = [chi2_quantile(5, p) for p in np.linspace(0.01, 0.999, 50)]
        assert all(a < b for a, b in zip(qs, qs[1:]))


class TestKummer:
    def test_zero_argument(self):
        assert kummer_1f1(2.3, 4.1, 0.0) == 1.0

    def test_equal_parameters_exponential(self):
        assert kummer_1f1(2.0, 2.0, 1.0) == pytest.approx(math.e, rel=1e-14)

    @pytest.mark.parametrize("args, expected", KUMMER_GOLDEN)
    def test_golden(self, args, expected):
        assert kummer_1f1(*args) == pytest.approx(expected, rel=1e-12)

    def test_closed_form_one_two(self):
        for x in (-5.0, -0.3, 0.7, 4.0):
            assert kummer_1f1(1.0, 2.0, x) == pytest.approx(math.expm1(x) / x, rel=1e-13)

    @pytest.mark.parametrize("b", [0.0, -1.0, -4.0])
    def test_nonpositive_integer_b(self, b):
        with pytest.raises(DomainError):
            kummer_1f1(1.0, b, 1.0)

    @given(a=st.floats(0.5, 6.0), db=st.floats(0.1, 8.0), x=st.floats(-40.0, 20.0))
    def test_against_mpmath(self, a, db, x):
        b = a + db
        assert kummer_1f1(a, b, x) == pytest.approx(float(mpmath.hyp1f1(a, b, x)), rel=1e-10)

    @given(a=st.floats(1.0, 6.0), db=st.floats(0.1, 8.0), x=st.floats(-30.0, 15.0))
    def test_contiguous_relation(self, a, db, x):
        b = a + db
        t1 = b * kummer_1f1(a, b, x)
        t2 = b * kummer_1f1(a - 1.0, b, x)
        t3 = x * kummer_1f1(a, b + 1.0, x)
        assert abs(t1 - t2 - t3) <= 1e-8 * max(abs(t1), abs(t2), abs(t3))


class TestMatern:
    @pytest.mark.parametrize("args, expected", MATERN_GOLDEN)
    def test_golden(self, args, expected):
        nu, s2, L, h = args
        assert matern_kernel(MaternParams(nu, s2, L), h) == pytest.approx(expected, abs=1e-12)

    def test_zero_lag_is_variance(self):
        assert matern_kernel(MaternParams(1.5, 2.5, 5.0), 0.0) == 2.5

    def test_exponential_case(self):
        assert matern_kernel(MaternParams(0.5, 1.0, 5.0), 5.0) == pytest.approx(math.exp(-1), abs=1e-15)

    def test_unsupported_smoothness(self):
        with pytest.raises(UnsupportedSmoothness):
            MaternParams(1.0)

    def test_bad_scale(self):
        with pytest.raises(DomainError):
            MaternParams(1.5, length_scale=0.0)

    @pytest.mark.parametrize("nu", [0.5, 1.5, 2.5, 3.5])
    def test_even_and_decreasing(self, nu):
        params = MaternParams(nu, 1.0, 3.0)
        hs = np.linspace(0, 10, 41)
        vals = [matern_kernel(params, h) for h in hs]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        assert matern_kernel(params, -2.0) == matern_kernel(params, 2.0)

    @pytest.mark.parametrize("nu", [0.5, 1.5, 2.5, 3.5])
    @pytest.mark.parametrize("p", [1, 5, 12])
    def test_matrices_are_spd(self, nu, p):
        spd_factorize(matern_covariance(p, MaternParams(nu, 1.0, 5.0)))
