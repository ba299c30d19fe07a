"""Bayes factor assembly from Monte Carlo ingredients.

For a hypothesis fixing some transformed parameters by equality constraints
and restricting others by order constraints, the Bayes factor against the
unconstrained alternative factorizes into four estimable quantities:

* the unconstrained posterior density at the equality value,
* the unconstrained prior density at the equality value,
* the probability of the order constraints under the completed prior
  (the constrained prior with its order constraints removed), and
* the expectation, over the conditional posterior given the equality
  constraints, of the completed-prior to conditional-prior density ratio
  times the order-constraint indicator.

``assemble_bf`` combines the four; ``assemble_bf_order_reduction`` is the
special case where the completed prior equals the conditional unconstrained
prior, and ``oracle_bf_quadrature`` computes the same Bayes factor by brute
force from marginal likelihoods for small conjugate problems.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .density import DensityEstimate, McEstimate
from .exceptions import AssemblyError, InvalidParameterError, OracleError

__all__ = [
    "HypothesisSpec",
    "SdIngredients",
    "assemble_bf",
    "assemble_bf_std_error",
    "assemble_bf_order_reduction",
    "order_reduction_std_error",
    "posterior_model_probs",
    "QuadratureProblem",
    "oracle_bf_quadrature",
]


@dataclass(frozen=True)
class HypothesisSpec:
    """Declarative description of a constrained hypothesis.

    ``transform`` maps the raw key parameters to transformed coordinates
    whose leading block is pinned to ``equality_point`` and whose next
    block is bounded below by ``order_thresholds``.  ``labels`` name the
    transformed coordinates for reporting.
    """

    equality_point: tuple
    order_thresholds: tuple
    transform: tuple | None = None
    labels: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "equality_point", tuple(float(v) for v in self.equality_point))
        object.__setattr__(self, "order_thresholds", tuple(float(v) for v in self.order_thresholds))
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        if self.transform is not None:
            matrix = np.asarray(self.transform, dtype=float)
            if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
                raise InvalidParameterError("transform must be a square matrix")
            if abs(np.linalg.det(matrix)) < 1e-12:
                raise InvalidParameterError("transform must be invertible")
            n_constrained = len(self.equality_point) + len(self.order_thresholds)
            if n_constrained > matrix.shape[0]:
                raise InvalidParameterError(
                    f"{n_constrained} constrained coordinates exceed the "
                    f"{matrix.shape[0]} rows of the transform"
                )
            object.__setattr__(
                self, "transform", tuple(tuple(float(v) for v in row) for row in matrix)
            )
        if self.labels and self.transform is not None and len(self.labels) != len(self.transform):
            raise InvalidParameterError("need one label per transformed coordinate")

    def to_dict(self):
        return {
            "equality_point": list(self.equality_point),
            "order_thresholds": list(self.order_thresholds),
            "transform": None if self.transform is None else [list(r) for r in self.transform],
            "labels": list(self.labels),
        }


def _value(x):
    return float(x.value) if hasattr(x, "value") else float(x)


def _rel_se(x):
    if hasattr(x, "std_error"):
        v = _value(x)
        return float(x.std_error) / v if v != 0.0 else 0.0
    return 0.0


@dataclass(frozen=True)
class SdIngredients:
    """The four estimated factors of the generalized density-ratio formula."""

    posterior_density_at_equality: DensityEstimate
    prior_density_at_equality: DensityEstimate
    completed_prior_prob: McEstimate
    prior_ratio_expectation: McEstimate

    def __post_init__(self):
        for name in (
            "posterior_density_at_equality",
            "prior_density_at_equality",
            "completed_prior_prob",
            "prior_ratio_expectation",
        ):
            if not math.isfinite(_value(getattr(self, name))):
                raise AssemblyError(f"{name} is not finite")
        if _value(self.prior_density_at_equality) <= 0.0:
            raise AssemblyError("prior density at the equality value must be positive")
        prob = _value(self.completed_prior_prob)
        if not 0.0 < prob <= 1.0:
            raise AssemblyError(f"completed prior probability must lie in (0, 1], got {prob}")


def assemble_bf(ingredients):
    """Bayes factor of the constrained against the unconstrained hypothesis.

    Computed in log space as ``log(post) - log(prior) - log(prob) +
    log(expectation)`` to stay finite in extreme-evidence cases; the
    returned value is the plain ratio.
    """
    post = _value(ingredients.posterior_density_at_equality)
    prior = _value(ingredients.prior_density_at_equality)
    prob = _value(ingredients.completed_prior_prob)
    expect = _value(ingredients.prior_ratio_expectation)
    if post <= 0.0:
        raise AssemblyError(
            "posterior density at the equality value is not positive; "
            "the Bayes factor underflows to zero"
        )
    if expect <= 0.0:
        raise AssemblyError("prior-ratio expectation must be positive")
    log_bf = math.log(post) - math.log(prior) - math.log(prob) + math.log(expect)
    try:
        return math.exp(log_bf)
    except OverflowError:
        return math.inf


def assemble_bf_std_error(ingredients, bf=None):
    """First-order delta-method standard error of the assembled Bayes factor.

    The four ingredients come from independent sampler runs, so their
    relative variances add.
    """
    if bf is None:
        bf = assemble_bf(ingredients)
    rel = np.array(
        [
            _rel_se(ingredients.posterior_density_at_equality),
            _rel_se(ingredients.prior_density_at_equality),
            _rel_se(ingredients.completed_prior_prob),
            _rel_se(ingredients.prior_ratio_expectation),
        ]
    )
    return float(bf * np.sqrt(np.sum(rel**2)))


def assemble_bf_order_reduction(
    posterior_density, prior_density, posterior_order_prob, prior_order_prob
):
    """Bayes factor when the completed prior is the conditional unconstrained prior.

    Reduces to the plain density ratio times the ratio of posterior to prior
    order-constraint probabilities.  With both probabilities equal to one
    this is the classic density ratio for a pure equality hypothesis.
    Arguments may be plain floats or estimate objects.
    """
    post = _value(posterior_density)
    prior = _value(prior_density)
    p_post = _value(posterior_order_prob)
    p_prior = _value(prior_order_prob)
    if prior <= 0.0 or p_prior <= 0.0:
        raise AssemblyError("prior density and prior order probability must be positive")
    if post <= 0.0:
        raise AssemblyError("posterior density must be positive")
    if not 0.0 < p_prior <= 1.0 or not 0.0 <= p_post <= 1.0:
        raise AssemblyError("order probabilities must lie in (0, 1]")
    return (post / prior) * (p_post / p_prior)


def order_reduction_std_error(
    posterior_density, prior_density, posterior_order_prob, prior_order_prob, bf=None
):
    """Delta-method standard error for :func:`assemble_bf_order_reduction`."""
    if bf is None:
        bf = assemble_bf_order_reduction(
            posterior_density, prior_density, posterior_order_prob, prior_order_prob
        )
    rel = np.array(
        [
            _rel_se(posterior_density),
            _rel_se(prior_density),
            _rel_se(posterior_order_prob),
            _rel_se(prior_order_prob),
        ]
    )
    return float(bf * np.sqrt(np.sum(rel**2)))


def posterior_model_probs(bf_cu, prior_odds=1.0):
    """Posterior probabilities ``(constrained, unconstrained)``.

    ``prior_odds`` is the prior probability ratio of the constrained to the
    unconstrained hypothesis; the default gives both hypotheses equal prior
    probability.
    """
    if not bf_cu > 0.0:
        raise InvalidParameterError(f"bf_cu must be positive, got {bf_cu}")
    if not prior_odds > 0.0:
        raise InvalidParameterError(f"prior_odds must be positive, got {prior_odds}")
    posterior_odds = bf_cu * prior_odds
    if math.isinf(posterior_odds):
        return 1.0, 0.0
    prob_c = posterior_odds / (1.0 + posterior_odds)
    return prob_c, 1.0 - prob_c


@dataclass(frozen=True)
class QuadratureProblem:
    """Marginal-likelihood integrands of a small test problem.

    ``log_joint_*`` map a parameter vector to log(likelihood * prior).  The
    constrained side may instead be a plain float (its log marginal
    likelihood up to the shared shift) when the hypothesis has no free
    parameters.  ``log_shift`` is subtracted from both integrands before
    exponentiation; choose it near the maximum of the unconstrained log
    joint so the integrands are O(1).
    """

    log_joint_unconstrained: object
    bounds_unconstrained: tuple
    log_joint_constrained: object
    bounds_constrained: tuple
    log_shift: float = 0.0


def _integrate(log_joint, bounds, log_shift):
    if not callable(log_joint):
        if len(bounds) != 0:
            raise InvalidParameterError("constant log joint requires empty bounds")
        return math.exp(float(log_joint) - log_shift), 0.0

    def integrand(*args):
        return math.exp(log_joint(np.array(args, dtype=float)) - log_shift)

    try:
        value, abserr = integrate.nquad(
            integrand, bounds, opts={"epsabs": 1e-12, "epsrel": 1e-9}
        )
    except Exception as exc:  # quadrature backends raise various types
        raise OracleError(f"quadrature failed: {exc}") from exc
    return value, abserr


def oracle_bf_quadrature(problem):
    """Bayes factor from marginal likelihoods by adaptive quadrature.

    Intended for conjugate test problems with at most three parameters;
    serves as an independent oracle for the density-ratio assembly.
    """
    if len(problem.bounds_unconstrained) > 3 or len(problem.bounds_constrained) > 3:
        raise InvalidParameterError("quadrature oracle supports at most 3 parameters per side")
    numer, err_c = _integrate(
        problem.log_joint_constrained, problem.bounds_constrained, problem.log_shift
    )
    denom, err_u = _integrate(
        problem.log_joint_unconstrained, problem.bounds_unconstrained, problem.log_shift
    )
    for side, value, err in (("constrained", numer, err_c), ("unconstrained", denom, err_u)):
        if not value > 0.0 or not math.isfinite(value):
            raise OracleError(f"{side} marginal likelihood quadrature returned {value}")
        if err > 1e-5 * value:
            raise OracleError(
                f"{side} marginal likelihood quadrature did not converge "
                f"(estimate {value:.6e}, error {err:.2e})"
            )
    return numer / denom
