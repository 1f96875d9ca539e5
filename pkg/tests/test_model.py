"""Joint density pieces checked against dense slogdet-based Gaussian oracles."""

import numpy as np
import pytest

from bfosr.ar1 import Ar1Spec, build_cov
from bfosr.basis import eval_basis, make_basis
from bfosr.errors import InvalidDimensionError, InvalidRangeError
from bfosr.model import (
    EnsembleDataset,
    HyperParams,
    ParamState,
    gamma_logpdf,
    invgamma_logpdf,
    log_likelihood,
    log_prior,
    simulate_dataset,
    synthetic_design,
)

from oracles import mvn_logpdf


def small_instance(seed=0, I=4, J=3, D=6, K=5, p=2):
    rng = np.random.default_rng(seed)
    times = 2020.0 + 10.0 * np.arange(D)
    basis = make_basis(K, times[0], times[-1], 0.01)
    design = synthetic_design(I, J, times, p=p, seed=seed)
    truth = ParamState(
        b_w=rng.normal(0, 0.5, size=(K, p + 1)),
        b_z=rng.normal(0, 0.5, size=(K, I)),
        sig2_w=rng.uniform(0.3, 1.5, size=p + 1),
        sig2_z=0.4,
        sigma2=0.25,
        psi=0.1,
        rho=0.6,
    )
    data = simulate_dataset(truth, design, basis, seed=seed + 1)
    return basis, data, truth


class TestLogLikelihood:
    def test_matches_dense_gaussian_sum(self):
        basis, data, state = small_instance()
        theta = eval_basis(basis, data.times)
        spec = Ar1Spec(state.sigma2, state.rho, "continuous")
        cov = build_cov(spec, data.times)
        want = 0.0
        for n in range(data.N):
            mean = theta @ state.b_z[:, data.group_of[n]]
            want += mvn_logpdf(data.Y[n], mean, cov)
        got = log_likelihood(state, data, basis)
        assert got == pytest.approx(want, rel=1e-12)

    def test_decade_mode_with_negative_rho(self):
        basis, data, state = small_instance(seed=5)
        state = state.replace(rho=-0.7)
        theta = eval_basis(basis, data.times)
        cov = build_cov(Ar1Spec(state.sigma2, -0.7, "decade"), data.times)
        want = sum(
            mvn_logpdf(data.Y[n], theta @ state.b_z[:, data.group_of[n]], cov)
            for n in range(data.N)
        )
        got = log_likelihood(state, data, basis, cov_mode="decade")
        assert got == pytest.approx(want, rel=1e-12)

    def test_out_of_domain_state_gives_minus_inf(self):
        basis, data, state = small_instance()
        assert log_likelihood(state.replace(sigma2=-1.0), data, basis) == -np.inf
        assert log_likelihood(state.replace(rho=1.0), data, basis) == -np.inf
        assert log_likelihood(state.replace(rho=-0.2), data, basis) == -np.inf
        # the same rho is fine where the domain is symmetric
        assert np.isfinite(log_likelihood(state.replace(rho=-0.2), data, basis, cov_mode="decade"))

    def test_dimension_mismatch_raises(self):
        basis, data, state = small_instance()
        bad = state.replace(b_z=np.zeros((basis.K, data.I + 1)))
        with pytest.raises(InvalidDimensionError):
            log_likelihood(bad, data, basis)


class TestLogPrior:
    def test_matches_oracle_assembly(self):
        basis, data, state = small_instance(seed=2)
        hp = HyperParams(
            a_w=np.array([2.0, 3.0, 4.0]),
            b_w=np.array([1.0, 0.5, 2.0]),
            a_z=5.0, b_z=2.0, nu=7.0, nu0=2.0, psi0=0.047, K=basis.K,
        )
        P_inv = np.linalg.inv(basis.P)
        want = 0.0
        for i in range(data.I):
            want += mvn_logpdf(state.b_z[:, i], state.b_w @ data.W[i], state.sig2_z * P_inv)
        for k in range(data.p + 1):
            want += mvn_logpdf(state.b_w[:, k], np.zeros(basis.K), state.sig2_w[k] * P_inv)
            want += invgamma_logpdf(state.sig2_w[k], hp.a_w[k], hp.b_w[k])
        want += invgamma_logpdf(state.sig2_z, hp.a_z, hp.b_z)
        want += invgamma_logpdf(state.sigma2, hp.nu / 2, hp.nu * state.psi / 2)
        want += gamma_logpdf(state.psi, hp.nu0 / 2, hp.nu0 / (2 * hp.psi0))
        want += -0.5 * state.rho**2 - 0.5 * np.log(2 * np.pi)
        got = log_prior(state, hp, data.W, basis)
        assert got == pytest.approx(want, rel=1e-12)

    def test_invalid_states_give_minus_inf_not_errors(self):
        basis, data, state = small_instance()
        hp = HyperParams(a_w=np.ones(3), b_w=np.ones(3), a_z=2.0, b_z=1.0,
                         nu=7.0, nu0=2.0, psi0=0.047, K=basis.K)
        for bad in (
            state.replace(sig2_z=0.0),
            state.replace(sigma2=-2.0),
            state.replace(psi=0.0),
            state.replace(sig2_w=np.array([0.5, -1.0, 0.5])),
            state.replace(rho=0.0),
            state.replace(rho=1.5),
        ):
            assert log_prior(bad, hp, data.W, basis) == -np.inf


class TestScalarDensities:
    def test_invgamma_normalizes(self):
        from scipy.integrate import quad
        val = quad(lambda x: np.exp(invgamma_logpdf(x, 3.0, 2.0)), 0, np.inf, limit=200)[0]
        assert val == pytest.approx(1.0, abs=1e-8)

    def test_gamma_matches_scipy(self):
        from scipy.stats import gamma as sp_gamma
        x = np.array([0.2, 1.0, 4.5])
        for xi in x:
            want = sp_gamma.logpdf(xi, a=2.5, scale=1 / 3.0)
            assert gamma_logpdf(xi, 2.5, 3.0) == pytest.approx(want, rel=1e-12)

    def test_nonpositive_support(self):
        assert invgamma_logpdf(0.0, 1.0, 1.0) == -np.inf
        assert gamma_logpdf(-1.0, 1.0, 1.0) == -np.inf


class TestSimulate:
    def test_deterministic_given_seed(self):
        basis, data, truth = small_instance()
        design = data
        a = simulate_dataset(truth, design, basis, seed=99)
        b = simulate_dataset(truth, design, basis, seed=99)
        np.testing.assert_array_equal(a.Y, b.Y)
        c = simulate_dataset(truth, design, basis, seed=100)
        assert np.any(a.Y != c.Y)

    def test_vanishing_noise_recovers_mean_curves(self):
        basis, data, truth = small_instance()
        quiet = truth.replace(sigma2=1e-14)
        sim = simulate_dataset(quiet, data, basis, seed=1)
        theta = eval_basis(basis, data.times)
        mean = (theta @ quiet.b_z)[:, data.group_of].T
        np.testing.assert_allclose(sim.Y, mean, atol=1e-5)

    def test_noise_covariance_structure(self):
        # empirical covariance over many rows approaches sigma2 * R(rho)
        times = 2020.0 + 10.0 * np.arange(4)
        basis = make_basis(4, times[0], times[-1], 0.01)
        design = synthetic_design(2, 4000, times, p=1, seed=0)
        truth = ParamState(
            b_w=np.zeros((4, 2)), b_z=np.zeros((4, 2)),
            sig2_w=np.ones(2), sig2_z=1.0, sigma2=2.0, psi=0.1, rho=0.5,
        )
        sim = simulate_dataset(truth, design, basis, seed=21)
        emp = np.cov(sim.Y.T)
        want = build_cov(Ar1Spec(2.0, 0.5, "continuous"), times)
        np.testing.assert_allclose(emp, want, atol=0.15)


class TestDatasetValidation:
    def test_group_indices_bounded(self):
        times = np.arange(3.0)
        with pytest.raises(InvalidRangeError):
            EnsembleDataset(
                Y=np.zeros((2, 3)), W=np.ones((2, 1)),
                group_of=np.array([0, 2]), times=times,
            )

    def test_every_scenario_observed(self):
        with pytest.raises(InvalidRangeError):
            EnsembleDataset(
                Y=np.zeros((2, 3)), W=np.ones((3, 1)),
                group_of=np.array([0, 1]), times=np.arange(3.0),
            )

    def test_leading_ones_and_rank(self):
        times = np.arange(3.0)
        with pytest.raises(InvalidRangeError):
            EnsembleDataset(
                Y=np.zeros((2, 3)), W=np.array([[1.0, 2.0], [0.5, 1.0]]),
                group_of=np.array([0, 1]), times=times,
            )
        with pytest.raises(InvalidRangeError):
            EnsembleDataset(
                Y=np.zeros((2, 3)), W=np.array([[1.0, 2.0], [1.0, 2.0]]),
                group_of=np.array([0, 1]), times=times,
            )

    def test_non_finite_rejected(self):
        Y = np.zeros((2, 3))
        Y[1, 2] = np.nan
        with pytest.raises(InvalidRangeError):
            EnsembleDataset(Y=Y, W=np.ones((2, 1)), group_of=np.array([0, 1]),
                            times=np.arange(3.0))

    def test_times_strictly_increasing(self):
        with pytest.raises(InvalidRangeError):
            EnsembleDataset(Y=np.zeros((2, 3)), W=np.ones((2, 1)),
                            group_of=np.array([0, 1]), times=np.array([0.0, 2.0, 2.0]))

    def test_shape_coherence(self):
        with pytest.raises(InvalidDimensionError):
            EnsembleDataset(Y=np.zeros((2, 4)), W=np.ones((2, 1)),
                            group_of=np.array([0, 1]), times=np.arange(3.0))

    def test_properties(self):
        ds = synthetic_design(4, 3, np.arange(5.0), p=2, seed=0)
        assert (ds.I, ds.D, ds.N, ds.p) == (4, 5, 12, 2)
        np.testing.assert_array_equal(ds.counts, 3)
        sums = ds.scenario_sums()
        assert sums.shape == (4, 5)


class TestHyperAndStateValidation:
    def test_hyperparams_positive(self):
        with pytest.raises(InvalidRangeError):
            HyperParams(a_w=np.array([1.0, -1.0]), b_w=np.ones(2), a_z=1.0,
                        b_z=1.0, nu=1.0, nu0=1.0, psi0=1.0)
        with pytest.raises(InvalidRangeError):
            HyperParams(a_w=np.ones(2), b_w=np.ones(2), a_z=1.0, b_z=1.0,
                        nu=1.0, nu0=1.0, psi0=1.0, alpha=0.0)

    def test_state_shapes(self):
        with pytest.raises(InvalidDimensionError):
            ParamState(b_w=np.zeros((4, 2)), b_z=np.zeros((5, 3)),
                       sig2_w=np.ones(2), sig2_z=1.0, sigma2=1.0, psi=1.0, rho=0.5)
        with pytest.raises(InvalidDimensionError):
            ParamState(b_w=np.zeros((4, 2)), b_z=np.zeros((4, 3)),
                       sig2_w=np.ones(3), sig2_z=1.0, sigma2=1.0, psi=1.0, rho=0.5)


class TestSyntheticDesign:
    def test_reference_rows_and_rank(self):
        ds = synthetic_design(10, 2, np.arange(4.0), p=3, seed=5)
        np.testing.assert_array_equal(ds.W[0, 1:], 1.0)
        np.testing.assert_array_equal(ds.W[1, 1:], 2.0)
        np.testing.assert_array_equal(ds.W[2, 1:], 3.0)
        assert np.linalg.matrix_rank(ds.W) == 4
        assert ds.scenario_ids[0] == "s01"
        assert len(ds.model_ids) == ds.N

    def test_deterministic_by_seed(self):
        a = synthetic_design(8, 2, np.arange(4.0), p=3, seed=9)
        b = synthetic_design(8, 2, np.arange(4.0), p=3, seed=9)
        np.testing.assert_array_equal(a.W, b.W)
