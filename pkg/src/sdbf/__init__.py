"""Bayes factors for equality-and-order constrained hypotheses.

The package computes the Bayes factor of a constrained hypothesis (equality
constraints plus order constraints on transformed key parameters) against
an unconstrained alternative through a generalized Savage-Dickey density
ratio: a posterior-to-prior density ratio at the equality value, divided by
the completed-prior probability of the order constraints, times a
prior-ratio expectation over the conditional posterior.

Two analyses are built in: a multivariate t test of equal-and-positive
standardized effects under JZS-style priors (:class:`MvtBayesFactor`), and
a multinomial test of ordered cell probabilities with one tie
(:class:`MultinomialBayesFactor`).  Both follow the scikit-learn estimator
protocol: configure in the constructor, ``fit`` on data, read fitted
attributes such as ``bayes_factor_`` and ``report_``.
"""

from .bayes_factor import (
    HypothesisSpec,
    QuadratureProblem,
    SdIngredients,
    assemble_bf,
    assemble_bf_order_reduction,
    assemble_bf_std_error,
    oracle_bf_quadrature,
    order_reduction_std_error,
    posterior_model_probs,
)
from .density import (
    DensityEstimate,
    McEstimate,
    kde_at_point,
    kde_values,
    mc_expectation,
    mc_probability,
    silverman_bandwidth,
)
from .exceptions import (
    AssemblyError,
    ChainDivergedError,
    DataError,
    DecompositionError,
    EstimationError,
    InvalidParameterError,
    OracleError,
    SdbfError,
)
from .mcmc import (
    ChainOutput,
    MvtModelState,
    SamplerConfig,
    run_constrained_chain,
    run_unconstrained_chain,
)
from .multinomial import (
    MultinomialBayesFactor,
    analytic_theta_e_density,
    conditional_posterior_draws,
    run_multinomial_test,
)
from .mvt import MvtBayesFactor, implied_conditional_prior, run_mvt_test
from .report import BayesFactorReport, render_report_json, validate_report_dict, write_report

__version__ = "0.1.0"

__all__ = [
    "AssemblyError",
    "BayesFactorReport",
    "ChainDivergedError",
    "ChainOutput",
    "DataError",
    "DecompositionError",
    "DensityEstimate",
    "EstimationError",
    "HypothesisSpec",
    "InvalidParameterError",
    "McEstimate",
    "MultinomialBayesFactor",
    "MvtBayesFactor",
    "MvtModelState",
    "OracleError",
    "QuadratureProblem",
    "SamplerConfig",
    "SdIngredients",
    "SdbfError",
    "analytic_theta_e_density",
    "assemble_bf",
    "assemble_bf_order_reduction",
    "assemble_bf_std_error",
    "conditional_posterior_draws",
    "implied_conditional_prior",
    "kde_at_point",
    "kde_values",
    "mc_expectation",
    "mc_probability",
    "oracle_bf_quadrature",
    "order_reduction_std_error",
    "posterior_model_probs",
    "render_report_json",
    "run_constrained_chain",
    "run_multinomial_test",
    "run_mvt_test",
    "run_unconstrained_chain",
    "silverman_bandwidth",
    "validate_report_dict",
    "write_report",
    "__version__",
]
