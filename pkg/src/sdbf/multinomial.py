"""Constrained hypothesis test for four multinomial cell probabilities.

Tests ``gamma_1 > gamma_2 = gamma_3 > gamma_4`` against an unconstrained
alternative with a Dirichlet prior on the simplex.  The equality constraint
reduces to ``theta_e = gamma_2 - gamma_3 = 0``; with the middle cells tied,
the remaining free probabilities ``(gamma_1, gamma_2, gamma_4)`` follow a
scaled Dirichlet law, and the order constraints become
``gamma_1 > gamma_2 > gamma_4``.

All four Bayes factor ingredients are Monte Carlo estimates over exact
draws (no MCMC is needed): pointwise KDEs of ``theta_e`` under the prior
and the posterior, the order probability under the completed scaled
Dirichlet prior, and the prior-ratio expectation over the conditional
posterior given the equality.  The marginal density of ``theta_e`` at zero
also has a closed form used as a cross-check.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln
from sklearn.base import BaseEstimator

from ._parallel import run_tasks
from ._validation import as_generator, check_positive_vector
from .bayes_factor import (
    HypothesisSpec,
    SdIngredients,
    assemble_bf,
    assemble_bf_std_error,
    posterior_model_probs,
)
from .density import kde_at_point, mc_expectation, mc_probability
from .distributions import Dirichlet, ScaledDirichlet
from .exceptions import InvalidParameterError
from .report import BayesFactorReport

__all__ = [
    "MultinomialBayesFactor",
    "run_multinomial_test",
    "conditional_posterior_draws",
    "conditional_alpha",
    "analytic_theta_e_density",
    "order_indicator",
]


def conditional_alpha(alpha):
    """Dirichlet parameters of ``(xi_1, xi_2, xi_4)`` given ``gamma_2 = gamma_3``.

    Conditioning a ``Dirichlet(a1, a2, a3, a4)`` on its two middle cells
    being equal merges them: ``(a1, a2 + a3 - 1, a4)``.
    """
    alpha = check_positive_vector(alpha, "alpha")
    if alpha.size != 4:
        raise InvalidParameterError("alpha must have four entries")
    merged = alpha[1] + alpha[2] - 1.0
    if merged <= 0.0:
        raise InvalidParameterError("alpha_2 + alpha_3 must exceed 1 for the conditional law")
    return np.array([alpha[0], merged, alpha[3]])


def conditional_posterior_draws(alpha, size, rng):
    """Draws of ``(gamma_1, ..., gamma_4)`` given ``gamma_2 = gamma_3``.

    Rows satisfy the tie exactly and sum to one: sample
    ``(xi_1, xi_2, xi_4)`` from the merged Dirichlet and halve the middle
    coordinate into the two tied cells.
    """
    xi = Dirichlet(conditional_alpha(alpha)).rvs(size, as_generator(rng))
    return np.column_stack([xi[:, 0], xi[:, 1] / 2.0, xi[:, 1] / 2.0, xi[:, 2]])


def analytic_theta_e_density(alpha):
    """Closed-form marginal density of ``gamma_2 - gamma_3`` at zero.

    For ``gamma ~ Dirichlet(a1, a2, a3, a4)`` the value is
    ``Gamma(a2+a3) (a1+a2+a3+a4-1) / (Gamma(a2) Gamma(a3) (a2+a3-1)
    2**(a2+a3-1))``, evaluated in log space to stay finite for large
    concentrations.
    """
    alpha = check_positive_vector(alpha, "alpha")
    if alpha.size != 4:
        raise InvalidParameterError("alpha must have four entries")
    a1, a2, a3, a4 = alpha
    if a2 + a3 <= 1.0:
        raise InvalidParameterError("alpha_2 + alpha_3 must exceed 1")
    log_comb = gammaln(a2 + a3) - gammaln(a2) - gammaln(a3)
    factor = (a1 + a2 + a3 + a4 - 1.0) / (a2 + a3 - 1.0)
    exponent = a2 + a3 - 1.0
    if log_comb < 700.0 and exponent < 1000.0:
        # dividing by an exact power of two keeps small cases exact
        return float(np.exp(log_comb) * factor / np.exp2(exponent))
    return float(np.exp(log_comb - exponent * np.log(2.0) + np.log(factor)))


def order_indicator(draws):
    """Indicator of ``gamma_1 > gamma_2 > gamma_4`` for 3- or 4-column draws."""
    last = draws.shape[1] - 1
    return (draws[:, 0] > draws[:, 1]) & (draws[:, 1] > draws[:, last])


# Ingredient tasks are top-level functions so a process pool can run them.


def _theta_e_density_task(alpha, n_mc, seed, kde_mode, n_boot):
    draws = Dirichlet(alpha).rvs(n_mc, as_generator(seed))
    theta_e = draws[:, 1] - draws[:, 2]
    del draws
    return kde_at_point(theta_e, 0.0, mode=kde_mode, n_boot=n_boot)


def _order_probability_task(completed_alpha, n_mc, seed):
    draws = ScaledDirichlet(completed_alpha).rvs(n_mc, as_generator(seed))
    return mc_probability(draws, order_indicator)


def _expectation_task(posterior_alpha, completed_alpha, conditional_prior_alpha, n_mc, seed):
    draws = conditional_posterior_draws(posterior_alpha, n_mc, as_generator(seed))
    numerator = ScaledDirichlet(completed_alpha)
    denominator = ScaledDirichlet(conditional_prior_alpha)

    def integrand(rows):
        log_ratio = numerator.logpdf(rows[:, 0], rows[:, 1]) - denominator.logpdf(
            rows[:, 0], rows[:, 1]
        )
        return np.exp(log_ratio) * order_indicator(rows)

    return mc_expectation(draws, integrand)


class MultinomialBayesFactor(BaseEstimator):
    """Bayes factor for an order-and-equality hypothesis on four cell rates.

    Parameters
    ----------
    completed_prior_alpha : triple of float
        Concentrations of the completed scaled-Dirichlet prior on
        ``(gamma_1, gamma_2, gamma_4)`` under the constrained hypothesis.
    unconstrained_prior_alpha : quadruple of float
        Dirichlet prior under the unconstrained hypothesis.
    n_mc : int
        Monte Carlo draws per ingredient.
    kde_mode : {"exact", "grid"}
        Pointwise KDE evaluation mode.
    n_boot : int
        Bootstrap replicates behind each KDE standard error.
    prior_odds : float
        Prior odds of the constrained hypothesis.
    seed : int, optional
        Master seed; the four ingredients draw from independent streams.

    Attributes
    ----------
    report_ : BayesFactorReport
    bayes_factor_ : float
    ingredients_ : SdIngredients
    posterior_alpha_ : ndarray
    analytic_prior_density_, analytic_posterior_density_ : float
    """

    def __init__(
        self,
        completed_prior_alpha=(9.0, 6.0, 1.0),
        unconstrained_prior_alpha=(1.0, 1.0, 1.0, 1.0),
        n_mc=10_000_000,
        kde_mode="exact",
        n_boot=200,
        prior_odds=1.0,
        seed=None,
    ):
        self.completed_prior_alpha = completed_prior_alpha
        self.unconstrained_prior_alpha = unconstrained_prior_alpha
        self.n_mc = n_mc
        self.kde_mode = kde_mode
        self.n_boot = n_boot
        self.prior_odds = prior_odds
        self.seed = seed

    @staticmethod
    def _validated_counts(X):
        counts = np.asarray(X, dtype=float).ravel()
        if counts.size != 4:
            raise InvalidParameterError(f"expected 4 category counts, got {counts.size}")
        if np.any(counts < 0) or not np.all(np.isfinite(counts)):
            raise InvalidParameterError("counts must be nonnegative and finite")
        if np.any(counts != np.round(counts)):
            raise InvalidParameterError("counts must be integers")
        if counts.sum() <= 0:
            raise InvalidParameterError("total count must be positive")
        return counts.astype(int)

    def fit(self, X, y=None):
        """Estimate the Bayes factor from the four observed category counts."""
        counts = self._validated_counts(X)
        completed = check_positive_vector(self.completed_prior_alpha, "completed_prior_alpha")
        if completed.size != 3:
            raise InvalidParameterError("completed_prior_alpha must have three entries")
        prior_alpha = check_positive_vector(
            self.unconstrained_prior_alpha, "unconstrained_prior_alpha"
        )
        if prior_alpha.size != 4:
            raise InvalidParameterError("unconstrained_prior_alpha must have four entries")
        n_mc = int(self.n_mc)
        if n_mc < 100:
            raise InvalidParameterError("n_mc must be at least 100")

        posterior_alpha = prior_alpha + counts
        cond_prior_alpha = conditional_alpha(prior_alpha)

        seed_seq = np.random.SeedSequence(self.seed)
        seeds = [int(c.generate_state(1, dtype=np.uint64)[0]) for c in seed_seq.spawn(4)]

        results = run_tasks(
            [
                (_theta_e_density_task, (prior_alpha, n_mc, seeds[0], self.kde_mode, self.n_boot)),
                (
                    _theta_e_density_task,
                    (posterior_alpha, n_mc, seeds[1], self.kde_mode, self.n_boot),
                ),
                (_order_probability_task, (completed, n_mc, seeds[2])),
                (_expectation_task, (posterior_alpha, completed, cond_prior_alpha, n_mc, seeds[3])),
            ]
        )
        prior_density, posterior_density, prior_prob, expectation = results

        self.ingredients_ = SdIngredients(
            posterior_density_at_equality=posterior_density,
            prior_density_at_equality=prior_density,
            completed_prior_prob=prior_prob,
            prior_ratio_expectation=expectation,
        )
        self.bayes_factor_ = assemble_bf(self.ingredients_)
        self.bf_std_error_ = assemble_bf_std_error(self.ingredients_, self.bayes_factor_)
        prob_c, prob_u = posterior_model_probs(self.bayes_factor_, self.prior_odds)
        self.posterior_prob_constrained_ = prob_c
        self.posterior_prob_unconstrained_ = prob_u
        self.posterior_alpha_ = posterior_alpha
        self.analytic_prior_density_ = analytic_theta_e_density(prior_alpha)
        self.analytic_posterior_density_ = analytic_theta_e_density(posterior_alpha)
        # transformed coordinates: tied-cell difference (equality), the two
        # order gaps, and one free cell to complete an invertible map
        self.hypothesis_ = HypothesisSpec(
            equality_point=(0.0,),
            order_thresholds=(0.0, 0.0),
            transform=((0, 1, -1, 0), (1, -1, 0, 0), (0, 1, 0, -1), (0, 1, 0, 0)),
            labels=(
                "tied-cell difference",
                "first-vs-second gap",
                "second-vs-fourth gap",
                "second cell",
            ),
        )
        self.n_features_in_ = 4

        settings = {
            "hypothesis": self.hypothesis_.to_dict(),
            "counts": [int(c) for c in counts],
            "completed_prior_alpha": [float(a) for a in completed],
            "unconstrained_prior_alpha": [float(a) for a in prior_alpha],
            "posterior_alpha": [float(a) for a in posterior_alpha],
            "conditional_prior_alpha": [float(a) for a in cond_prior_alpha],
            "n_mc": n_mc,
            "kde_mode": self.kde_mode,
            "n_boot": int(self.n_boot),
            "seed_prior_density": seeds[0],
            "seed_posterior_density": seeds[1],
            "seed_prior_probability": seeds[2],
            "seed_expectation": seeds[3],
            "max_nonfinite_fraction": 1e-3,
        }
        extras = {
            "analytic_prior_density_at_zero": self.analytic_prior_density_,
            "analytic_posterior_density_at_zero": self.analytic_posterior_density_,
            "prior_density_relative_gap": prior_density.value / self.analytic_prior_density_ - 1.0,
            "posterior_density_relative_gap": posterior_density.value
            / self.analytic_posterior_density_
            - 1.0,
        }
        self.report_ = BayesFactorReport(
            analysis="multinomial",
            bf_cu=self.bayes_factor_,
            bf_std_error=self.bf_std_error_,
            posterior_prob_constrained=prob_c,
            posterior_prob_unconstrained=prob_u,
            prior_odds=float(self.prior_odds),
            ingredients=self.ingredients_,
            seed=self.seed,
            settings=settings,
            extras=extras,
            notes=[],
        )
        return self


def run_multinomial_test(counts, **params):
    """Functional wrapper: fit :class:`MultinomialBayesFactor` on the counts."""
    return MultinomialBayesFactor(**params).fit(counts).report_
