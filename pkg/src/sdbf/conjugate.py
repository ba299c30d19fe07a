"""Small conjugate test problems with closed-form answers.

These models exist to validate the Monte Carlo pipeline: each one has
analytic marginal densities, analytic or quadrature-friendly marginal
likelihoods, and conditional posteriors that can be sampled exactly.  They
back the oracle checks run by ``sdbf validate`` and the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import betaln, gammaln
from scipy.stats import beta as beta_dist
from scipy.stats import norm

from ._validation import as_generator, check_positive
from .bayes_factor import QuadratureProblem
from .density import mc_expectation
from .distributions import StudentT
from .exceptions import InvalidParameterError

__all__ = ["NormalMeanModel", "BinomialModel", "GaussianOrderModel"]


def _invgamma_logpdf(x, shape, scale):
    x = np.asarray(x, dtype=float)
    return shape * np.log(scale) - gammaln(shape) - (shape + 1.0) * np.log(x) - scale / x


def _sample_invgamma(shape, scale, size, rng):
    return scale / as_generator(rng).gamma(shape, 1.0, size)


@dataclass
class NormalMeanModel:
    """Test of a zero normal mean with unknown variance.

    ``y_i ~ N(theta, sigma2)`` with the unit-information prior
    ``theta | sigma2 ~ N(0, sigma2 / prior_kappa)`` and an inverse gamma
    prior on ``sigma2``.  The marginal prior of ``theta`` is then Student t
    (Cauchy for the default hyperparameters) and every posterior quantity is
    available in closed form through normal-inverse-gamma conjugacy.
    """

    y: np.ndarray
    prior_kappa: float = 1.0
    prior_shape: float = 0.5
    prior_scale: float = 0.5

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float).ravel()
        if self.y.size < 2:
            raise InvalidParameterError("need at least two observations")
        check_positive(self.prior_kappa, "prior_kappa")
        check_positive(self.prior_shape, "prior_shape")
        check_positive(self.prior_scale, "prior_scale")
        self.n = self.y.size
        self.ybar = float(self.y.mean())
        self.centered_ss = float(np.sum((self.y - self.ybar) ** 2))
        self.sum_sq = float(np.sum(self.y**2))

    # Normal-inverse-gamma posterior hyperparameters.
    @property
    def kappa_n(self):
        return self.prior_kappa + self.n

    @property
    def mu_n(self):
        return self.n * self.ybar / self.kappa_n

    @property
    def shape_n(self):
        return self.prior_shape + self.n / 2.0

    @property
    def scale_n(self):
        shrink = self.prior_kappa * self.n * self.ybar**2 / (2.0 * self.kappa_n)
        return self.prior_scale + self.centered_ss / 2.0 + shrink

    def prior_effect_marginal(self):
        """Marginal prior of the mean: Student t with ``2 * prior_shape`` df."""
        scale = np.sqrt(self.prior_scale / (self.prior_shape * self.prior_kappa))
        return StudentT(df=2.0 * self.prior_shape, location=0.0, scale=float(scale))

    def posterior_effect_marginal(self):
        scale = np.sqrt(self.scale_n / (self.shape_n * self.kappa_n))
        return StudentT(df=2.0 * self.shape_n, location=self.mu_n, scale=float(scale))

    def conditional_variance_prior(self):
        """Inverse gamma parameters of ``sigma2 | theta = 0`` under the prior."""
        return self.prior_shape + 0.5, self.prior_scale

    def conditional_variance_posterior(self):
        """Inverse gamma parameters of ``sigma2 | theta = 0, y``."""
        shape0, scale0 = self.conditional_variance_prior()
        return shape0 + self.n / 2.0, scale0 + self.sum_sq / 2.0

    def sample_conditional_variance(self, size, rng):
        shape, scale = self.conditional_variance_posterior()
        return _sample_invgamma(shape, scale, size, rng)

    def sd_ratio(self):
        """Posterior over prior density of the mean at zero."""
        return self.posterior_effect_marginal().pdf(0.0) / self.prior_effect_marginal().pdf(0.0)

    def log_marginal_unconstrained(self):
        return (
            -0.5 * self.n * np.log(2.0 * np.pi)
            + 0.5 * (np.log(self.prior_kappa) - np.log(self.kappa_n))
            + gammaln(self.shape_n)
            - gammaln(self.prior_shape)
            + self.prior_shape * np.log(self.prior_scale)
            - self.shape_n * np.log(self.scale_n)
        )

    def log_marginal_null(self, shape_c, scale_c):
        """Marginal likelihood of ``theta = 0`` with an IG(shape, scale) variance prior."""
        return (
            -0.5 * self.n * np.log(2.0 * np.pi)
            + gammaln(shape_c + self.n / 2.0)
            - gammaln(shape_c)
            + shape_c * np.log(scale_c)
            - (shape_c + self.n / 2.0) * np.log(scale_c + self.sum_sq / 2.0)
        )

    def prior_ratio(self, shape_c, scale_c):
        """Density ratio of the chosen IG variance prior to the implied conditional one."""
        shape0, scale0 = self.conditional_variance_prior()

        def ratio(sigma2):
            return np.exp(
                _invgamma_logpdf(sigma2, shape_c, scale_c)
                - _invgamma_logpdf(sigma2, shape0, scale0)
            )

        return ratio

    def free_prior_bayes_factor_mc(self, shape_c, scale_c, n_draws, rng):
        """Free-variance-prior Bayes factor with the correction term by Monte Carlo."""
        draws = self.sample_conditional_variance(n_draws, rng)
        expectation = mc_expectation(draws, self.prior_ratio(shape_c, scale_c))
        bf = self.sd_ratio() * expectation.value
        se = self.sd_ratio() * expectation.std_error
        return bf, se, expectation

    def free_prior_bayes_factor_quadrature(self, shape_c, scale_c):
        """Same Bayes factor with the correction expectation done by quadrature."""
        from scipy.integrate import quad

        shape_n, scale_n = self.conditional_variance_posterior()
        ratio = self.prior_ratio(shape_c, scale_c)

        def integrand(sigma2):
            return ratio(sigma2) * np.exp(_invgamma_logpdf(sigma2, shape_n, scale_n))

        expectation, _ = quad(integrand, 0.0, np.inf)
        return self.sd_ratio() * expectation

    def quadrature_problem(self, shape_c, scale_c):
        n, kappa0 = self.n, self.prior_kappa
        a0, b0 = self.prior_shape, self.prior_scale
        y = self.y

        def log_joint_u(params):
            theta, sigma2 = params
            if sigma2 <= 0.0:
                return -np.inf
            loglik = -0.5 * n * np.log(2.0 * np.pi * sigma2) - np.sum(
                (y - theta) ** 2
            ) / (2.0 * sigma2)
            log_prior_theta = -0.5 * np.log(2.0 * np.pi * sigma2 / kappa0) - kappa0 * theta**2 / (
                2.0 * sigma2
            )
            return loglik + log_prior_theta + _invgamma_logpdf(sigma2, a0, b0)

        def log_joint_c(params):
            (sigma2,) = params
            if sigma2 <= 0.0:
                return -np.inf
            loglik = -0.5 * n * np.log(2.0 * np.pi * sigma2) - self.sum_sq / (2.0 * sigma2)
            return loglik + _invgamma_logpdf(sigma2, shape_c, scale_c)

        var_hat = max(self.centered_ss / n, 1e-12)
        shift = float(log_joint_u(np.array([self.ybar, var_hat])))
        return QuadratureProblem(
            log_joint_unconstrained=log_joint_u,
            bounds_unconstrained=((-np.inf, np.inf), (0.0, np.inf)),
            log_joint_constrained=log_joint_c,
            bounds_constrained=((0.0, np.inf),),
            log_shift=shift,
        )


@dataclass
class BinomialModel:
    """Two-cell multinomial (binomial) with a Beta prior on the success rate."""

    successes: int
    trials: int
    prior_a: float = 1.0
    prior_b: float = 1.0

    def __post_init__(self):
        if not 0 <= self.successes <= self.trials:
            raise InvalidParameterError("successes must lie in [0, trials]")
        check_positive(self.prior_a, "prior_a")
        check_positive(self.prior_b, "prior_b")

    def sd_ratio(self, rate):
        """Posterior over prior Beta density at the constrained rate."""
        post = beta_dist.pdf(rate, self.prior_a + self.successes, self.prior_b + self.trials - self.successes)
        prior = beta_dist.pdf(rate, self.prior_a, self.prior_b)
        return post / prior

    def quadrature_problem(self, rate):
        k, n = self.successes, self.trials
        a, b = self.prior_a, self.prior_b
        log_kernel_c = k * np.log(rate) + (n - k) * np.log1p(-rate)

        def log_joint_u(params):
            (theta,) = params
            if not 0.0 < theta < 1.0:
                return -np.inf
            loglik = k * np.log(theta) + (n - k) * np.log1p(-theta)
            log_prior = (a - 1.0) * np.log(theta) + (b - 1.0) * np.log1p(-theta) - betaln(a, b)
            return loglik + log_prior

        shift = float(log_kernel_c)
        return QuadratureProblem(
            log_joint_unconstrained=log_joint_u,
            bounds_unconstrained=((0.0, 1.0),),
            log_joint_constrained=log_kernel_c,
            bounds_constrained=(),
            log_shift=shift,
        )


@dataclass
class GaussianOrderModel:
    """Bivariate normal means with one equality and one sign constraint.

    ``y_i ~ N((mu1, mu2), I)`` with independent ``N(0, prior_scale**2)``
    priors under the unconstrained model.  The constrained model fixes
    ``mu1 = 0`` and restricts ``mu2 > 0`` under a completed prior
    ``N(0, completed_scale**2)``.  Every factor of the density-ratio formula
    is available in closed form, and the marginal likelihoods integrate
    accurately by quadrature, so this model exercises the full
    equality-plus-order assembly end to end.
    """

    y: np.ndarray
    prior_scale: float = 1.0
    completed_scale: float = 2.0

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if self.y.ndim != 2 or self.y.shape[1] != 2:
            raise InvalidParameterError("y must be an (n, 2) matrix")
        check_positive(self.prior_scale, "prior_scale")
        check_positive(self.completed_scale, "completed_scale")
        self.n = self.y.shape[0]
        self.ybar = self.y.mean(axis=0)

    @property
    def posterior_var(self):
        return 1.0 / (1.0 / self.prior_scale**2 + self.n)

    @property
    def posterior_mean(self):
        return self.posterior_var * self.n * self.ybar

    def posterior_density_mu1_at_zero(self):
        return float(norm.pdf(0.0, self.posterior_mean[0], np.sqrt(self.posterior_var)))

    def prior_density_mu1_at_zero(self):
        return float(norm.pdf(0.0, 0.0, self.prior_scale))

    def prior_ratio_integrand(self):
        tau, kappa = self.prior_scale, self.completed_scale

        def integrand(mu2):
            ratio = np.exp(norm.logpdf(mu2, 0.0, kappa) - norm.logpdf(mu2, 0.0, tau))
            return ratio * (mu2 > 0.0)

        return integrand

    def sample_conditional_posterior(self, size, rng):
        """Draws of ``mu2 | mu1 = 0, y`` (the coordinates are independent)."""
        rng = as_generator(rng)
        return self.posterior_mean[1] + np.sqrt(self.posterior_var) * rng.standard_normal(size)

    def quadrature_problem(self):
        tau, kappa = self.prior_scale, self.completed_scale
        y, n = self.y, self.n
        sq = float(np.sum(y**2))

        def loglik(mu1, mu2):
            return (
                -n * np.log(2.0 * np.pi)
                - 0.5 * (sq - 2.0 * n * (mu1 * self.ybar[0] + mu2 * self.ybar[1]))
                - 0.5 * n * (mu1**2 + mu2**2)
            )

        def log_joint_u(params):
            mu1, mu2 = params
            return loglik(mu1, mu2) + norm.logpdf(mu1, 0.0, tau) + norm.logpdf(mu2, 0.0, tau)

        def log_joint_c(params):
            (mu2,) = params
            if mu2 <= 0.0:
                return -np.inf
            # completed prior truncated to mu2 > 0, hence the factor 2
            return loglik(0.0, mu2) + np.log(2.0) + norm.logpdf(mu2, 0.0, kappa)

        shift = float(log_joint_u(self.ybar))
        return QuadratureProblem(
            log_joint_unconstrained=log_joint_u,
            bounds_unconstrained=((-np.inf, np.inf), (-np.inf, np.inf)),
            log_joint_constrained=log_joint_c,
            bounds_constrained=((0.0, np.inf),),
            log_shift=shift,
        )
