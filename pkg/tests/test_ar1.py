"""AR(1) covariance modes: entry patterns, positive definiteness, identities."""

import numpy as np
import pytest

from bfosr.ar1 import (
    Ar1Spec,
    build_cov,
    cov_logdet,
    cov_solve,
    rho_domain,
)
from bfosr.errors import InvalidDimensionError, InvalidRangeError, MisalignedGridError


def uniform(D, step=10.0, start=2020.0):
    return start + step * np.arange(D)


class TestEntryPatterns:
    @pytest.mark.parametrize("rho", [-0.8, -0.3, 0.0, 0.4, 0.95])
    def test_decade_power_of_index_lag(self, rho):
        spec = Ar1Spec(2.5, rho, mode="decade")
        t = uniform(6)
        cov = build_cov(spec, t)
        i, j = np.indices((6, 6))
        np.testing.assert_allclose(cov, 2.5 * np.float_power(rho, abs(i - j)) if rho != 0
                                   else 2.5 * np.eye(6), atol=1e-14)

    def test_continuous_fractional_exponent(self):
        spec = Ar1Spec(1.0, 0.5, mode="continuous", base_step=10.0)
        t = np.array([0.0, 3.0, 10.0, 24.0])
        cov = build_cov(spec, t)
        for a in range(4):
            for b in range(4):
                assert cov[a, b] == pytest.approx(0.5 ** (abs(t[a] - t[b]) / 10.0), abs=1e-14)

    def test_continuous_base_step_rescales_lags(self):
        t = np.array([0.0, 5.0, 12.0])
        c5 = build_cov(Ar1Spec(1.0, 0.5, "continuous", base_step=5.0), t)
        c10 = build_cov(Ar1Spec(1.0, 0.25, "continuous", base_step=10.0), t)
        np.testing.assert_allclose(c5, c10, atol=1e-14)

    @pytest.mark.parametrize("rho", [0.05, 0.3, 0.6, 0.9])
    def test_continuous_equals_decade_on_uniform_grid(self, rho):
        t = uniform(8)
        dec = build_cov(Ar1Spec(1.7, rho, "decade"), t)
        con = build_cov(Ar1Spec(1.7, rho, "continuous", base_step=10.0), t)
        np.testing.assert_array_equal(dec, con)

    def test_literal_obs_odd_exponent_pattern(self):
        rho = 0.6
        cov = build_cov(Ar1Spec(1.0, rho, "supplementary-literal"), uniform(5))
        for k in range(1, 5):
            np.testing.assert_allclose(np.diag(cov, k), rho ** (2 * k - 1), atol=1e-14)
        np.testing.assert_array_equal(np.diag(cov), 1.0)

    def test_literal_full_matches_decade(self):
        t = uniform(7)
        lit = build_cov(Ar1Spec(1.0, -0.4, "supplementary-literal", literal_variant="full"), t)
        dec = build_cov(Ar1Spec(1.0, -0.4, "decade"), t)
        np.testing.assert_array_equal(lit, dec)

    def test_sigma2_scales_every_entry(self):
        t = uniform(4)
        base = build_cov(Ar1Spec(1.0, 0.5, "decade"), t)
        np.testing.assert_allclose(build_cov(Ar1Spec(3.0, 0.5, "decade"), t), 3.0 * base)


class TestPositiveDefiniteness:
    @pytest.mark.parametrize("mode,variant", [
        ("decade", "obs"),
        ("continuous", "obs"),
        ("supplementary-literal", "obs"),
        ("supplementary-literal", "full"),
    ])
    @pytest.mark.parametrize("D", [2, 5, 8, 30])
    def test_cholesky_over_domain_sweep(self, mode, variant, D):
        lo, hi = rho_domain(mode, variant)
        for rho in np.linspace(lo + 0.01, hi - 0.01, 21):
            spec = Ar1Spec(1.0, float(rho), mode, literal_variant=variant)
            cov = build_cov(spec, uniform(D))
            np.linalg.cholesky(cov)  # raises if not PD

    def test_obs_pattern_indefinite_for_negative_rho(self):
        # the lag pattern rho**(2k-1) loses positive definiteness for
        # strongly negative rho, which is why that domain is excluded
        rho, D = -0.5, 8
        i, j = np.indices((D, D))
        lag = abs(i - j)
        R = np.where(lag == 0, 1.0, np.sign(rho) ** (2 * lag - 1) * abs(rho) ** (2.0 * lag - 1))
        assert np.linalg.eigvalsh(R).min() < -1e-6

    def test_continuous_nonuniform_grid_pd(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            t = np.sort(rng.uniform(0, 100, size=12))
            if np.any(np.diff(t) <= 0):
                continue
            cov = build_cov(Ar1Spec(0.7, 0.85, "continuous"), t)
            np.linalg.cholesky(cov)


class TestLogDetAndSolve:
    @pytest.mark.parametrize("mode,variant,rho", [
        ("decade", "obs", -0.6),
        ("decade", "obs", 0.3),
        ("continuous", "obs", 0.8),
        ("supplementary-literal", "full", -0.2),
        ("supplementary-literal", "obs", 0.55),
    ])
    @pytest.mark.parametrize("D", [2, 4, 9])
    def test_logdet_matches_dense(self, mode, variant, rho, D):
        spec = Ar1Spec(1.9, rho, mode, literal_variant=variant)
        t = uniform(D)
        want = np.linalg.slogdet(build_cov(spec, t))[1]
        assert cov_logdet(spec, D) == pytest.approx(want, abs=1e-9)

    def test_solve_residual_small(self):
        rng = np.random.default_rng(11)
        t = np.sort(rng.uniform(0, 50, size=9))
        spec = Ar1Spec(0.4, 0.9, "continuous")
        cov = build_cov(spec, t)
        rhs = rng.standard_normal((9, 3))
        x = cov_solve(spec, t, rhs)
        assert np.max(np.abs(cov @ x - rhs)) < 1e-8

    def test_solve_vector_rhs(self):
        t = uniform(5)
        spec = Ar1Spec(1.0, -0.5, "decade")
        rhs = np.arange(5.0)
        x = cov_solve(spec, t, rhs)
        np.testing.assert_allclose(build_cov(spec, t) @ x, rhs, atol=1e-10)


class TestValidation:
    def test_rho_domain_intervals(self):
        assert rho_domain("continuous") == (0.0, 1.0)
        assert rho_domain("decade") == (-1.0, 1.0)
        assert rho_domain("supplementary-literal", "obs") == (0.0, 1.0)
        assert rho_domain("supplementary-literal", "full") == (-1.0, 1.0)
        with pytest.raises(InvalidRangeError):
            rho_domain("weekly")

    def test_rho_outside_domain_rejected(self):
        with pytest.raises(InvalidRangeError):
            Ar1Spec(1.0, -0.5, "continuous")
        with pytest.raises(InvalidRangeError):
            Ar1Spec(1.0, 1.0, "decade")
        with pytest.raises(InvalidRangeError):
            Ar1Spec(1.0, -0.2, "supplementary-literal", literal_variant="obs")
        Ar1Spec(1.0, -0.2, "supplementary-literal", literal_variant="full")

    def test_rho_zero_only_where_integer_exponents(self):
        Ar1Spec(1.0, 0.0, "decade")
        Ar1Spec(1.0, 0.0, "supplementary-literal", literal_variant="full")
        with pytest.raises(InvalidRangeError):
            Ar1Spec(1.0, 0.0, "continuous")
        with pytest.raises(InvalidRangeError):
            Ar1Spec(1.0, 0.0, "supplementary-literal", literal_variant="obs")

    def test_sigma2_must_be_positive(self):
        for s2 in (0.0, -1.0):
            with pytest.raises(InvalidRangeError):
                Ar1Spec(s2, 0.5, "decade")

    def test_uniform_grid_required_for_index_modes(self):
        t = np.array([0.0, 10.0, 21.0])
        with pytest.raises(MisalignedGridError):
            build_cov(Ar1Spec(1.0, 0.5, "decade"), t)
        with pytest.raises(MisalignedGridError):
            build_cov(Ar1Spec(1.0, 0.5, "supplementary-literal"), t)
        build_cov(Ar1Spec(1.0, 0.5, "continuous"), t)  # fine

    def test_times_must_increase(self):
        with pytest.raises(InvalidRangeError):
            build_cov(Ar1Spec(1.0, 0.5, "continuous"), np.array([0.0, 5.0, 5.0]))
        with pytest.raises(InvalidDimensionError):
            build_cov(Ar1Spec(1.0, 0.5, "continuous"), np.zeros((2, 2)))

    def test_unknown_mode_rejected(self):
        with pytest.raises(InvalidRangeError):
            Ar1Spec(1.0, 0.5, "annual")
        with pytest.raises(InvalidRangeError):
            Ar1Spec(1.0, 0.5, "supplementary-literal", literal_variant="fill")
