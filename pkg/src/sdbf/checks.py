"""Self-validation suite: oracle and property checks behind ``sdbf validate``.

Each check compares part of the pipeline against an independent reference:
an analytic law, a quadrature oracle, or a closed-form conjugate posterior.
All randomness is seeded, so the suite is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import kstest

from ._validation import as_generator
from .bayes_factor import (
    SdIngredients,
    assemble_bf,
    assemble_bf_order_reduction,
    assemble_bf_std_error,
    oracle_bf_quadrature,
    order_reduction_std_error,
)
from .conjugate import BinomialModel, GaussianOrderModel, NormalMeanModel
from .datasets import cd45_count_differences, mendel_pea_counts
from .density import DensityEstimate, McEstimate, kde_at_point, mc_expectation, mc_probability
from .distributions import Cauchy, Dirichlet, InverseWishart, ScaledDirichlet, cholesky_lower
from .mcmc import (
    SamplerConfig,
    delta_posterior_moments,
    run_constrained_chain,
    run_unconstrained_chain,
)
from .multinomial import (
    conditional_alpha,
    conditional_posterior_draws,
    order_indicator,
)

__all__ = ["CheckResult", "run_all", "CHECK_NAMES"]

KDE_ZERO_BANDWIDTH_FAULT = "kde-zero-bandwidth"


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    value: float | None
    target: str
    std_error: float | None = None
    detail: str = ""

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        value = "-" if self.value is None else f"{self.value:.6g}"
        se = "-" if self.std_error is None else f"{self.std_error:.3g}"
        detail = f"  [{self.detail}]" if self.detail else ""
        return f"{status}  {self.name}: value={value} target={self.target} se={se}{detail}"


def _check_cauchy_mixture_ks(fast):
    n, tol = (100_000, 0.02) if fast else (1_000_000, 0.01)
    rng = as_generator(20_001)
    scale = 0.5
    phi = InverseWishart(1.0, [[scale**2]]).rvs(rng, size=n)[:, 0, 0]
    delta = np.sqrt(phi) * rng.standard_normal(n)
    stat = kstest(delta, Cauchy(0.0, scale).cdf).statistic
    return CheckResult(
        name="cauchy_mixture_ks",
        passed=stat < tol,
        value=float(stat),
        target=f"< {tol}",
        detail=f"n={n}",
    )


def _check_dirichlet_simplex(fast):
    n = 20_000 if fast else 100_000
    rng = as_generator(20_002)
    draws = Dirichlet([0.7, 1.3, 2.1, 3.5]).rvs(n, rng)
    dev_plain = np.abs(draws.sum(axis=1) - 1.0).max()
    scaled = ScaledDirichlet([9.0, 6.0, 1.0]).rvs(n, rng)
    dev_scaled = np.abs(scaled[:, 0] + 2.0 * scaled[:, 1] + scaled[:, 2] - 1.0).max()
    value = float(max(dev_plain, dev_scaled))
    return CheckResult(
        name="dirichlet_simplex",
        passed=value < 1e-12,
        value=value,
        target="< 1e-12",
        detail=f"n={n}",
    )


def _check_cholesky_roundtrip(fast):
    rng = as_generator(20_003)
    worst = 0.0
    for p in (2, 3, 5):
        for _ in range(5):
            a = rng.standard_normal((p, p))
            matrix = a @ a.T + 0.1 * np.eye(p)
            chol = cholesky_lower(matrix)
            if not np.allclose(chol, np.tril(chol)) or np.any(np.diag(chol) <= 0):
                return CheckResult(
                    name="cholesky_roundtrip",
                    passed=False,
                    value=None,
                    target="lower triangular, positive diagonal",
                )
            err = np.linalg.norm(chol @ chol.T - matrix) / np.linalg.norm(matrix)
            worst = max(worst, float(err))
    return CheckResult(
        name="cholesky_roundtrip",
        passed=worst < 1e-10,
        value=worst,
        target="< 1e-10",
    )


def _check_conjugate_mcmc_oracle(fast):
    n_draws = 4_000 if fast else 20_000
    rng = as_generator(20_004)
    data = np.array([0.3, 0.6]) + rng.standard_normal((40, 2))
    phi_fixed = np.array([[0.5, 0.2], [0.2, 0.8]])
    worst = 0.0

    # Unconstrained: with Sigma and Phi frozen the effect draws are iid
    # normal with moments given by the conjugate formula.
    config = SamplerConfig(
        n_draws=n_draws,
        prior_scale_matrix=np.diag([0.25, 0.25]),
        seed=50,
        n_burnin=50,
    )
    chain = run_unconstrained_chain(data, config, fix_sigma=np.eye(2), fix_phi=phi_fixed)
    mean, cov = delta_posterior_moments(data.mean(axis=0), data.shape[0], phi_fixed)
    draws = chain.delta_draws
    for j in range(2):
        se = np.sqrt(cov[j, j] / n_draws)
        worst = max(worst, abs(draws[:, j].mean() - mean[j]) / se)
    emp_cov = np.cov(draws, rowvar=False)
    for i in range(2):
        for j in range(2):
            se = np.sqrt((cov[i, i] * cov[j, j] + cov[i, j] ** 2) / n_draws)
            worst = max(worst, abs(emp_cov[i, j] - cov[i, j]) / se)

    # Pooled: the common effect pools all n*p whitened observations.
    config_pooled = SamplerConfig(
        n_draws=n_draws,
        prior_scale_matrix=np.array([[0.0625]]),
        seed=51,
        n_burnin=50,
    )
    phi_scalar = np.array([[0.7]])
    chain_pooled = run_constrained_chain(data, config_pooled, fix_sigma=np.eye(2), fix_phi=phi_scalar)
    mean_pooled, cov_pooled = delta_posterior_moments(
        data.mean(axis=0), data.shape[0], phi_scalar, pooled=True
    )
    pooled = chain_pooled.delta_draws[:, 0]
    se = np.sqrt(cov_pooled[0, 0] / n_draws)
    worst = max(worst, abs(pooled.mean() - mean_pooled[0]) / se)
    var_se = cov_pooled[0, 0] * np.sqrt(2.0 / n_draws)
    worst = max(worst, abs(pooled.var(ddof=1) - cov_pooled[0, 0]) / var_se)

    return CheckResult(
        name="conjugate_mcmc_oracle",
        passed=worst < 2.0,
        value=float(worst),
        target="< 2 standard errors",
        detail=f"n_draws={n_draws}",
    )


def _check_seed_determinism(fast):
    data = cd45_count_differences()
    config = SamplerConfig(
        n_draws=300,
        prior_scale_matrix=np.diag([0.25, 0.25]),
        seed=77,
        n_burnin=100,
    )
    first = run_unconstrained_chain(data, config)
    second = run_unconstrained_chain(data, config)
    same = (
        np.array_equal(first.delta_draws, second.delta_draws)
        and np.array_equal(first.sigma_draws, second.sigma_draws)
        and np.array_equal(first.phi_draws, second.phi_draws)
    )
    return CheckResult(
        name="seed_determinism",
        passed=bool(same),
        value=None,
        target="bit-identical chains",
    )


def _check_kde_convergence(fast, inject_fault=None):
    n, tol = (100_000, 0.05) if fast else (1_000_000, 0.02)
    rng = as_generator(20_006)
    bandwidth = 0.0 if inject_fault == KDE_ZERO_BANDWIDTH_FAULT else None
    normal_draws = rng.standard_normal(n)
    kde_normal = kde_at_point(normal_draws, 0.0, bandwidth=bandwidth, n_boot=0)
    err_normal = abs(kde_normal.value - 1.0 / np.sqrt(2.0 * np.pi)) * np.sqrt(2.0 * np.pi)
    cauchy_draws = rng.standard_cauchy(n)
    kde_cauchy = kde_at_point(cauchy_draws, 0.0, bandwidth=bandwidth, n_boot=0)
    err_cauchy = abs(kde_cauchy.value - 1.0 / np.pi) * np.pi
    value = float(max(err_normal, err_cauchy))
    return CheckResult(
        name="kde_convergence",
        passed=value < tol,
        value=value,
        target=f"relative error < {tol}",
        detail=f"n={n}",
    )


def _check_prior_reproduction_ks(fast):
    n, tol = (10_000, 0.05) if fast else (100_000, 0.02)
    scale = 0.25
    config = SamplerConfig(
        n_draws=n,
        prior_scale_matrix=np.array([[scale**2]]),
        seed=20_007,
        n_burnin=2_000,
        prior_mixing_df=1.0,
    )
    pooled = run_constrained_chain(None, config)
    stat_pooled = kstest(pooled.delta_draws[:, 0], Cauchy(0.0, scale).cdf).statistic

    config2 = SamplerConfig(
        n_draws=n,
        prior_scale_matrix=np.diag([0.25, 0.25]),
        seed=20_008,
        n_burnin=2_000,
    )
    wide = run_unconstrained_chain(None, config2)
    stat_wide = kstest(wide.delta_draws[:, 0], Cauchy(0.0, 0.5).cdf).statistic
    value = float(max(stat_pooled, stat_wide))
    return CheckResult(
        name="prior_reproduction_ks",
        passed=value < tol,
        value=value,
        target=f"< {tol}",
        detail=f"n={n}",
    )


def _check_density_ratio_identity_quadrature(fast):
    n_mc = 50_000 if fast else 200_000
    rng = as_generator(20_009)
    data = np.array([0.1, 0.6]) + rng.standard_normal((25, 2))
    model = GaussianOrderModel(data, prior_scale=1.0, completed_scale=2.0)
    draws = model.sample_conditional_posterior(n_mc, rng)
    expectation = mc_expectation(draws, model.prior_ratio_integrand())
    ingredients = SdIngredients(
        posterior_density_at_equality=DensityEstimate.exact(model.posterior_density_mu1_at_zero()),
        prior_density_at_equality=DensityEstimate.exact(model.prior_density_mu1_at_zero()),
        completed_prior_prob=McEstimate.exact(0.5),
        prior_ratio_expectation=expectation,
    )
    bf = assemble_bf(ingredients)
    se = assemble_bf_std_error(ingredients, bf)
    oracle = oracle_bf_quadrature(model.quadrature_problem())
    value = abs(bf - oracle) / max(se, 1e-12)
    return CheckResult(
        name="density_ratio_identity_quadrature",
        passed=value < 3.0,
        value=float(value),
        target="< 3 standard errors",
        std_error=float(se),
        detail=f"bf={bf:.6g} oracle={oracle:.6g}",
    )


def _check_normal_mean_free_prior_quadrature(fast):
    rng = as_generator(20_010)
    data = 0.25 + rng.standard_normal(20)
    model = NormalMeanModel(data)
    bf = model.free_prior_bayes_factor_quadrature(model.prior_shape, model.prior_scale)
    oracle = oracle_bf_quadrature(model.quadrature_problem(model.prior_shape, model.prior_scale))
    value = abs(bf - oracle) / oracle
    return CheckResult(
        name="normal_mean_free_prior_quadrature",
        passed=value < 0.01,
        value=float(value),
        target="relative error < 0.01",
        detail=f"bf={bf:.6g} oracle={oracle:.6g}",
    )


def _check_no_order_constraint_reduction(fast):
    n_mc = 100_000 if fast else 500_000
    rng = as_generator(20_011)
    data = 0.25 + rng.standard_normal(20)
    model = NormalMeanModel(data)
    draws = model.sample_conditional_variance(n_mc, rng)
    expectation = mc_expectation(draws, model.prior_ratio(model.prior_shape, model.prior_scale))
    ingredients = SdIngredients(
        posterior_density_at_equality=DensityEstimate.exact(
            model.posterior_effect_marginal().pdf(0.0)
        ),
        prior_density_at_equality=DensityEstimate.exact(model.prior_effect_marginal().pdf(0.0)),
        completed_prior_prob=McEstimate.exact(1.0),
        prior_ratio_expectation=expectation,
    )
    bf = assemble_bf(ingredients)
    se = assemble_bf_std_error(ingredients, bf)
    reference = model.free_prior_bayes_factor_quadrature(model.prior_shape, model.prior_scale)
    value = abs(bf - reference) / max(se, 1e-12)
    return CheckResult(
        name="no_order_constraint_reduction",
        passed=value < 3.0,
        value=float(value),
        target="< 3 standard errors",
        std_error=float(se),
        detail=f"bf={bf:.6g} reference={reference:.6g}",
    )


def _dirichlet_diff_kde(alpha, n, seed):
    draws = Dirichlet(alpha).rvs(n, as_generator(seed))
    return kde_at_point(draws[:, 1] - draws[:, 2], 0.0, n_boot=0)


def _check_order_probability_reduction(fast):
    n = 100_000 if fast else 1_000_000
    counts = mendel_pea_counts()
    prior_alpha = np.ones(4)
    posterior_alpha = prior_alpha + counts
    cond_alpha = conditional_alpha(prior_alpha)
    completed = ScaledDirichlet(cond_alpha)

    # Completed prior equal to the conditional unconstrained prior: the
    # density-ratio expectation degenerates to an order probability, and
    # the full assembly must agree with the reduced posterior/prior
    # probability-ratio form.  All estimates use independent streams.
    post_a = _dirichlet_diff_kde(posterior_alpha, n, 30_001)
    prior_a = _dirichlet_diff_kde(prior_alpha, n, 30_002)
    prob_a = mc_probability(completed.rvs(n, as_generator(30_003)), order_indicator)
    cond_draws_a = conditional_posterior_draws(posterior_alpha, n, as_generator(30_004))
    expect_a = mc_expectation(cond_draws_a, lambda rows: order_indicator(rows).astype(float))
    ingredients = SdIngredients(
        posterior_density_at_equality=post_a,
        prior_density_at_equality=prior_a,
        completed_prior_prob=prob_a,
        prior_ratio_expectation=expect_a,
    )
    bf_full = assemble_bf(ingredients)
    se_full = assemble_bf_std_error(ingredients, bf_full)

    post_b = _dirichlet_diff_kde(posterior_alpha, n, 30_005)
    prior_b = _dirichlet_diff_kde(prior_alpha, n, 30_006)
    cond_draws_b = conditional_posterior_draws(posterior_alpha, n, as_generator(30_007))
    post_order = mc_probability(cond_draws_b, order_indicator)
    prior_order = mc_probability(completed.rvs(n, as_generator(30_008)), order_indicator)
    bf_reduced = assemble_bf_order_reduction(post_b, prior_b, post_order, prior_order)
    se_reduced = order_reduction_std_error(post_b, prior_b, post_order, prior_order, bf_reduced)

    combined = np.hypot(se_full, se_reduced)
    value = abs(bf_full - bf_reduced) / max(combined, 1e-12)
    return CheckResult(
        name="order_probability_reduction",
        passed=value < 3.0,
        value=float(value),
        target="< 3 combined standard errors",
        std_error=float(combined),
        detail=f"full={bf_full:.6g} reduced={bf_reduced:.6g} n={n}",
    )


def _check_binomial_sd_quadrature(fast):
    model = BinomialModel(successes=7, trials=20, prior_a=2.0, prior_b=3.0)
    rate = 0.4
    oracle = oracle_bf_quadrature(model.quadrature_problem(rate))
    reference = model.sd_ratio(rate)
    value = abs(oracle - reference) / reference
    return CheckResult(
        name="binomial_sd_quadrature",
        passed=value < 1e-5,
        value=float(value),
        target="relative error < 1e-5",
        detail=f"oracle={oracle:.8g} reference={reference:.8g}",
    )


_CHECKS = [
    _check_cauchy_mixture_ks,
    _check_dirichlet_simplex,
    _check_cholesky_roundtrip,
    _check_conjugate_mcmc_oracle,
    _check_seed_determinism,
    _check_kde_convergence,
    _check_prior_reproduction_ks,
    _check_density_ratio_identity_quadrature,
    _check_normal_mean_free_prior_quadrature,
    _check_no_order_constraint_reduction,
    _check_order_probability_reduction,
    _check_binomial_sd_quadrature,
]

CHECK_NAMES = [fn.__name__.removeprefix("_check_") for fn in _CHECKS]


def run_all(fast=False, inject_fault=None):
    """Run every check; returns a list of :class:`CheckResult`.

    ``inject_fault`` deliberately breaks a check (used to test that
    failures are reported); the only recognized value is
    ``"kde-zero-bandwidth"``.
    """
    results = []
    for fn in _CHECKS:
        name = fn.__name__.removeprefix("_check_")
        kwargs = {}
        if fn is _check_kde_convergence and inject_fault is not None:
            kwargs["inject_fault"] = inject_fault
        try:
            results.append(fn(fast, **kwargs))
        except Exception as exc:
            results.append(
                CheckResult(
                    name=name,
                    passed=False,
                    value=None,
                    target="no error",
                    detail=f"{type(exc).__name__}: {exc}",
                )
            )
    return results
