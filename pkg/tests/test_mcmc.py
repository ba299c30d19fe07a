import numpy as np
import pytest
from scipy.stats import invgamma, kstest

from sdbf._validation import SPD_EIGEN_FLOOR
from sdbf.datasets import (
    CD45_STEP_SDS_CONSTRAINED,
    CD45_STEP_SDS_UNCONSTRAINED,
    cd45_count_differences,
)
from sdbf.distributions import Cauchy
from sdbf.exceptions import DataError, InvalidParameterError
from sdbf.mcmc import (
    MvtModelState,
    SamplerConfig,
    delta_posterior_moments,
    gibbs_delta_step,
    gibbs_phi_step,
    run_constrained_chain,
    run_unconstrained_chain,
    rw_sigma_step,
)


class TestDeltaPosteriorMoments:
    def test_flat_prior_limit_recovers_data_mean(self):
        zbar = np.array([0.4, -0.2])
        mean, cov = delta_posterior_moments(zbar, 30, 1e12 * np.eye(2))
        np.testing.assert_allclose(mean, zbar, rtol=1e-9)
        np.testing.assert_allclose(cov, np.eye(2) / 30.0, rtol=1e-9)

    def test_large_n_covariance_limit(self):
        n = 10_000_000
        _, cov = delta_posterior_moments(np.zeros(2), n, np.diag([0.5, 2.0]))
        np.testing.assert_allclose(cov, np.eye(2) / n, rtol=1e-4)

    def test_scalar_conjugate_formula(self):
        # with unit variance data, prior N(0, s^2): mean = n ybar / (s^-2 + n)
        ybar, n, s2 = 0.7, 25, 0.3
        mean, cov = delta_posterior_moments(np.array([ybar]), n, np.array([[s2]]))
        assert mean[0] == pytest.approx(n * ybar / (1.0 / s2 + n), rel=1e-12)
        assert cov[0, 0] == pytest.approx(1.0 / (1.0 / s2 + n), rel=1e-12)

    def test_pooled_uses_all_coordinates(self):
        # the common effect sees n * p unit-variance observations
        zbar = np.array([0.6, 0.3])
        n, phi2 = 36, 0.8
        mean, cov = delta_posterior_moments(zbar, n, np.array([[phi2]]), pooled=True)
        precision = 1.0 / phi2 + 2 * n
        assert cov[0, 0] == pytest.approx(1.0 / precision, rel=1e-12)
        assert mean[0] == pytest.approx(2 * n * zbar.mean() / precision, rel=1e-12)


class TestGibbsDeltaStep:
    def test_draws_match_conditional_moments(self, rng):
        data = np.array([0.2, 0.5]) + np.random.default_rng(3).standard_normal((40, 2))
        state = MvtModelState(
            delta=np.zeros(2), sigma=np.eye(2), phi=np.array([[0.5, 0.1], [0.1, 0.4]])
        )
        draws = np.array([gibbs_delta_step(state, data, rng) for _ in range(8_000)])
        mean, cov = delta_posterior_moments(data.mean(axis=0), 40, state.phi)
        np.testing.assert_allclose(draws.mean(axis=0), mean, atol=4 * np.sqrt(cov.max() / 8_000))
        np.testing.assert_allclose(np.cov(draws, rowvar=False), cov, atol=0.002)

    def test_prior_only_draws_from_mixing_normal(self, rng):
        state = MvtModelState(delta=np.zeros(1), sigma=None, phi=np.array([[0.09]]))
        draws = np.array([gibbs_delta_step(state, None, rng)[0] for _ in range(4_000)])
        assert draws.mean() == pytest.approx(0.0, abs=4 * 0.3 / np.sqrt(4_000))
        assert draws.std() == pytest.approx(0.3, rel=0.05)


class TestGibbsPhiStep:
    def test_zero_effect_reduces_to_prior_update(self, rng):
        # k = 1 Cauchy mixing: IW(2, s) which is IG(1, s/2)
        s = 0.0625
        draws = np.array(
            [gibbs_phi_step(np.zeros(1), [[s]], rng)[0, 0] for _ in range(30_000)]
        )
        assert kstest(draws, invgamma(a=1.0, scale=s / 2.0).cdf).statistic < 0.01

    def test_scalar_inverse_gamma_identity(self, rng):
        s, delta = 0.0625, 0.55
        draws = np.array(
            [gibbs_phi_step(np.array([delta]), [[s]], rng)[0, 0] for _ in range(30_000)]
        )
        target = invgamma(a=1.0, scale=(s + delta**2) / 2.0)
        assert kstest(draws, target.cdf).statistic < 0.01

    def test_student_mixing_df(self, rng):
        # prior_df = 2 shifts the posterior df to 3: IW(3, s) = IG(1.5, s/2)
        s = 0.125
        draws = np.array(
            [gibbs_phi_step(np.zeros(1), [[s]], rng, prior_df=2.0)[0, 0] for _ in range(30_000)]
        )
        assert kstest(draws, invgamma(a=1.5, scale=s / 2.0).cdf).statistic < 0.01


class TestRwSigmaStep:
    @pytest.fixture()
    def setup(self):
        data = cd45_count_differences()
        state = MvtModelState(
            delta=np.array([0.5, 0.2]),
            sigma=np.cov(data, rowvar=False),
            phi=np.eye(2),
        )
        return data, state

    def test_tiny_steps_always_accepted(self, setup, rng):
        data, state = setup
        sigma, accepted = rw_sigma_step(state, data, [1e-9, 1e-9, 1e-9], rng)
        assert accepted.all()

    def test_non_pd_candidates_rejected_without_state_change(self, setup, rng):
        data, state = setup
        # a gigantic off-diagonal step destroys positive definiteness
        sigma, accepted = rw_sigma_step(state, data, [1e-9, 1e12, 1e-9], rng)
        assert not accepted[1]
        assert sigma[1, 0] == state.sigma[1, 0]
        assert np.linalg.eigvalsh(sigma).min() > SPD_EIGEN_FLOOR

    def test_acceptance_rates_in_efficient_band(self, setup, rng):
        data, state = setup
        counts = np.zeros(3)
        sweeps = 3_000
        for _ in range(sweeps):
            state.sigma, accepted = rw_sigma_step(
                state, data, CD45_STEP_SDS_UNCONSTRAINED, rng
            )
            counts += accepted
        rates = counts / sweeps
        assert np.all(rates > 0.1) and np.all(rates < 0.6)

    def test_step_count_must_match_triangle(self, setup, rng):
        data, state = setup
        with pytest.raises(InvalidParameterError):
            rw_sigma_step(state, data, [1.0, 2.0], rng)


class TestChains:
    def test_seed_determinism(self, cd45_data):
        config = SamplerConfig(
            n_draws=400, prior_scale_matrix=np.diag([0.25, 0.25]), seed=5, n_burnin=100
        )
        a = run_unconstrained_chain(cd45_data, config)
        b = run_unconstrained_chain(cd45_data, config)
        assert np.array_equal(a.delta_draws, b.delta_draws)
        assert np.array_equal(a.sigma_draws, b.sigma_draws)
        assert np.array_equal(a.phi_draws, b.phi_draws)
        assert np.array_equal(a.acceptance_rates, b.acceptance_rates)

    def test_sigma_draws_respect_eigen_floor(self, cd45_data):
        config = SamplerConfig(
            n_draws=500, prior_scale_matrix=np.diag([0.25, 0.25]), seed=6, n_burnin=200
        )
        out = run_unconstrained_chain(cd45_data, config)
        for sigma in out.sigma_draws:
            assert np.linalg.eigvalsh(sigma).min() > SPD_EIGEN_FLOOR

    def test_nonfinite_data_rejected(self):
        data = np.ones((10, 2))
        data[3, 1] = np.nan
        config = SamplerConfig(n_draws=10, prior_scale_matrix=np.eye(2), seed=1, n_burnin=1)
        with pytest.raises(DataError):
            run_unconstrained_chain(data, config)

    def test_degenerate_data_rejected(self):
        data = np.ones((20, 2))  # zero variance: singular sample covariance
        config = SamplerConfig(n_draws=10, prior_scale_matrix=np.eye(2), seed=1, n_burnin=1)
        with pytest.raises(DataError):
            run_unconstrained_chain(data, config)

    def test_more_dimensions_than_rows_rejected(self):
        data = np.random.default_rng(0).standard_normal((2, 2))
        config = SamplerConfig(n_draws=10, prior_scale_matrix=np.eye(2), seed=1, n_burnin=1)
        with pytest.raises(DataError):
            run_unconstrained_chain(data, config)

    def test_adaptive_steps_reach_target_band(self, cd45_data):
        config = SamplerConfig(
            n_draws=2_000,
            prior_scale_matrix=np.diag([0.25, 0.25]),
            seed=8,
            n_burnin=3_000,
        )
        out = run_unconstrained_chain(cd45_data, config)
        assert np.all(out.acceptance_rates > 0.15)
        assert np.all(out.acceptance_rates < 0.5)

    def test_unconstrained_prior_only_reproduces_cauchy(self):
        config = SamplerConfig(
            n_draws=30_000,
            prior_scale_matrix=np.diag([0.25, 0.25]),
            seed=9,
            n_burnin=1_000,
        )
        out = run_unconstrained_chain(None, config)
        assert out.sigma_draws is None
        for j in range(2):
            stat = kstest(out.delta_draws[:, j], Cauchy(0.0, 0.5).cdf).statistic
            assert stat < 0.03

    def test_constrained_prior_only_reproduces_cauchy(self):
        config = SamplerConfig(
            n_draws=30_000,
            prior_scale_matrix=np.array([[0.0625]]),
            seed=10,
            n_burnin=1_000,
            prior_mixing_df=1.0,
        )
        out = run_constrained_chain(None, config)
        stat = kstest(out.delta_draws[:, 0], Cauchy(0.0, 0.25).cdf).statistic
        assert stat < 0.03

    def test_conjugate_oracle_with_frozen_blocks(self, cd45_data):
        # freezing Sigma and Phi makes the effect draws iid normal with
        # moments given by the conjugate formula
        rng = np.random.default_rng(11)
        data = np.array([0.4, 0.1]) + rng.standard_normal((60, 2))
        phi = np.array([[0.6, -0.1], [-0.1, 0.3]])
        config = SamplerConfig(
            n_draws=6_000, prior_scale_matrix=np.diag([0.25, 0.25]), seed=12, n_burnin=20
        )
        out = run_unconstrained_chain(data, config, fix_sigma=np.eye(2), fix_phi=phi)
        mean, cov = delta_posterior_moments(data.mean(axis=0), 60, phi)
        for j in range(2):
            se = np.sqrt(cov[j, j] / 6_000)
            assert abs(out.delta_draws[:, j].mean() - mean[j]) < 2.0 * se

    def test_constrained_chain_pools_both_coordinates(self, cd45_data):
        rng = np.random.default_rng(13)
        data = 0.5 + rng.standard_normal((50, 2))
        phi = np.array([[0.4]])
        config = SamplerConfig(
            n_draws=6_000, prior_scale_matrix=np.array([[0.0625]]), seed=14, n_burnin=20
        )
        out = run_constrained_chain(data, config, fix_sigma=np.eye(2), fix_phi=phi)
        mean, cov = delta_posterior_moments(data.mean(axis=0), 50, phi, pooled=True)
        se = np.sqrt(cov[0, 0] / 6_000)
        assert abs(out.delta_draws[:, 0].mean() - mean[0]) < 2.0 * se
        # the pooled variance uses n * p observations, distinguishable at
        # this sample size from the unpooled (n-observation) variance
        wrong_precision = 1.0 / phi[0, 0] + 50
        assert abs(out.delta_draws[:, 0].var(ddof=1) - cov[0, 0]) < 3.0 * cov[0, 0] * np.sqrt(
            2.0 / 6_000
        )
        assert out.delta_draws[:, 0].var(ddof=1) < 1.0 / wrong_precision * 0.75

    def test_constrained_golden_expectation(self, cd45_data):
        config = SamplerConfig(
            n_draws=20_000,
            prior_scale_matrix=np.array([[0.0625]]),
            seed=15,
            n_burnin=3_000,
            prior_mixing_df=1.0,
            rw_step_sds=np.array(CD45_STEP_SDS_CONSTRAINED),
        )
        out = run_constrained_chain(cd45_data, config)
        draws = out.delta_draws[:, 0]
        numer, denom = Cauchy(0.0, 0.5), Cauchy(0.0, 0.25)
        ratio = np.exp(numer.logpdf(draws) - denom.logpdf(draws)) * (draws > 0)
        assert ratio.mean() == pytest.approx(1.098799, rel=0.05)
        assert (draws > 0).mean() > 0.99
