import numpy as np
import pytest

from sdbf.bayes_factor import (
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
from sdbf.density import DensityEstimate, McEstimate, kde_at_point
from sdbf.exceptions import AssemblyError, InvalidParameterError, OracleError


def ingredients(post, prior, prob, expect, ses=(0.0, 0.0, 0.0, 0.0)):
    return SdIngredients(
        posterior_density_at_equality=DensityEstimate(post, 0.1, 1000, ses[0]),
        prior_density_at_equality=DensityEstimate(prior, 0.1, 1000, ses[1]),
        completed_prior_prob=McEstimate(prob, 1000, ses[2]),
        prior_ratio_expectation=McEstimate(expect, 1000, ses[3]),
    )


class TestAssembleBf:
    def test_t_test_reference_values(self):
        bf = assemble_bf(ingredients(0.9871618, np.sqrt(2.0) / np.pi, 0.5, 1.098799))
        assert round(bf, 1) == 4.8

    def test_multinomial_reference_values(self):
        bf = assemble_bf(ingredients(13.71403, 1.476556, 0.8949818, 10.50881))
        assert bf == pytest.approx(109.0572, rel=1e-5)

    def test_identity_ingredients(self):
        assert assemble_bf(ingredients(1.0, 1.0, 1.0, 1.0)) == pytest.approx(1.0, abs=1e-15)

    def test_log_space_is_overflow_safe(self):
        # evidence beyond float range saturates to inf instead of raising
        assert assemble_bf(ingredients(1e300, 1e-12, 1.0, 1e8)) == np.inf
        tiny = assemble_bf(ingredients(1e-290, 1e10, 1.0, 1.0))
        assert 0.0 < tiny < 1e-250

    def test_zero_prior_density_rejected(self):
        with pytest.raises(AssemblyError):
            ingredients(1.0, 0.0, 0.5, 1.0)

    def test_zero_prior_probability_rejected(self):
        with pytest.raises(AssemblyError):
            ingredients(1.0, 1.0, 0.0, 1.0)

    def test_zero_posterior_density_rejected(self):
        with pytest.raises(AssemblyError):
            assemble_bf(ingredients(0.0, 1.0, 0.5, 1.0))

    def test_delta_method_std_error(self):
        ing = ingredients(2.0, 1.0, 0.5, 1.0, ses=(0.2, 0.05, 0.05, 0.1))
        bf = assemble_bf(ing)
        expected = bf * np.sqrt((0.2 / 2) ** 2 + 0.05**2 + 0.1**2 + 0.1**2)
        assert assemble_bf_std_error(ing) == pytest.approx(expected, rel=1e-12)

    def test_exact_ingredients_carry_zero_error(self):
        ing = SdIngredients(
            posterior_density_at_equality=DensityEstimate.exact(2.0),
            prior_density_at_equality=DensityEstimate.exact(1.0),
            completed_prior_prob=McEstimate.exact(0.5),
            prior_ratio_expectation=McEstimate.exact(1.0),
        )
        assert assemble_bf_std_error(ing) == 0.0


class TestOrderReduction:
    def test_probabilities_one_reduce_to_density_ratio(self):
        assert assemble_bf_order_reduction(3.0, 1.5, 1.0, 1.0) == pytest.approx(2.0)

    def test_arithmetic(self):
        assert assemble_bf_order_reduction(1.0, 1.0, 0.9, 0.5) == pytest.approx(1.8)

    def test_accepts_estimate_objects(self):
        bf = assemble_bf_order_reduction(
            DensityEstimate(3.0, 0.1, 1000, 0.1),
            DensityEstimate.exact(1.5),
            McEstimate(0.9, 1000, 0.01),
            McEstimate.exact(0.5),
        )
        assert bf == pytest.approx(3.6)

    def test_std_error(self):
        post = DensityEstimate(3.0, 0.1, 1000, 0.3)
        prior = DensityEstimate.exact(1.5)
        p_post = McEstimate(0.9, 1000, 0.009)
        p_prior = McEstimate.exact(0.5)
        bf = assemble_bf_order_reduction(post, prior, p_post, p_prior)
        expected = bf * np.sqrt(0.1**2 + 0.01**2)
        assert order_reduction_std_error(post, prior, p_post, p_prior) == pytest.approx(
            expected, rel=1e-12
        )

    def test_invalid_inputs(self):
        with pytest.raises(AssemblyError):
            assemble_bf_order_reduction(1.0, 0.0, 0.5, 0.5)
        with pytest.raises(AssemblyError):
            assemble_bf_order_reduction(1.0, 1.0, 0.5, 0.0)


class TestPosteriorModelProbs:
    def test_even_bayes_factor(self):
        assert posterior_model_probs(1.0) == pytest.approx((0.5, 0.5))

    def test_infinite_limit(self):
        prob_c, prob_u = posterior_model_probs(np.inf)
        assert (prob_c, prob_u) == (1.0, 0.0)

    def test_probabilities_sum_to_one(self):
        for bf in (0.01, 0.5, 4.8, 109.0572, 1e6):
            for odds in (0.1, 1.0, 3.0):
                prob_c, prob_u = posterior_model_probs(bf, odds)
                assert prob_c + prob_u == pytest.approx(1.0, abs=1e-15)
                assert prob_c == pytest.approx(bf * odds / (1.0 + bf * odds))

    def test_reference_bf_does_not_give_published_split(self):
        # 4.8 under equal prior odds gives 0.828, not the often-quoted 0.783
        prob_c, _ = posterior_model_probs(4.8)
        assert prob_c == pytest.approx(4.8 / 5.8, rel=1e-12)
        assert abs(prob_c - 0.783) > 0.04

    def test_invalid_arguments(self):
        with pytest.raises(InvalidParameterError):
            posterior_model_probs(0.0)
        with pytest.raises(InvalidParameterError):
            posterior_model_probs(1.0, prior_odds=0.0)


class TestHypothesisSpec:
    def test_round_trips_through_dict(self):
        spec = HypothesisSpec(
            equality_point=(0.0,),
            order_thresholds=(0.0,),
            transform=((1.0, -1.0), (0.0, 1.0)),
            labels=("difference", "common effect"),
        )
        document = spec.to_dict()
        assert document["equality_point"] == [0.0]
        assert document["transform"] == [[1.0, -1.0], [0.0, 1.0]]
        assert document["labels"] == ["difference", "common effect"]

    def test_singular_transform_rejected(self):
        with pytest.raises(InvalidParameterError):
            HypothesisSpec((0.0,), (0.0,), transform=((1.0, 1.0), (1.0, 1.0)))

    def test_dimension_consistency(self):
        with pytest.raises(InvalidParameterError):
            HypothesisSpec((0.0,), (0.0, 0.0), transform=((1.0, 0.0), (0.0, 1.0)))
        with pytest.raises(InvalidParameterError):
            HypothesisSpec(
                (0.0,), (0.0,), transform=((1.0, 0.0), (0.0, 1.0)), labels=("only one",)
            )


class TestScaleInvariance:
    def test_density_ratio_invariant_under_affine_rescaling(self, rng):
        # rescaling both sample sets and the query point leaves the
        # posterior/prior density ratio unchanged (bandwidths scale along)
        posterior = 0.4 + 0.3 * rng.standard_normal(50_000)
        prior = rng.standard_cauchy(50_000)
        x0, c = 0.1, 37.5
        ratio = (
            kde_at_point(posterior, x0, n_boot=0).value
            / kde_at_point(prior, x0, n_boot=0).value
        )
        scaled_ratio = (
            kde_at_point(c * posterior, c * x0, n_boot=0).value
            / kde_at_point(c * prior, c * x0, n_boot=0).value
        )
        assert scaled_ratio == pytest.approx(ratio, rel=1e-9)


class TestQuadratureOracle:
    def test_identical_hypotheses_give_unity(self):
        def log_joint(params):
            (x,) = params
            return -0.5 * x**2

        problem = QuadratureProblem(
            log_joint_unconstrained=log_joint,
            bounds_unconstrained=((-np.inf, np.inf),),
            log_joint_constrained=log_joint,
            bounds_constrained=((-np.inf, np.inf),),
        )
        assert oracle_bf_quadrature(problem) == pytest.approx(1.0, rel=1e-9)

    def test_dimension_cap(self):
        problem = QuadratureProblem(
            log_joint_unconstrained=lambda p: 0.0,
            bounds_unconstrained=((0, 1),) * 4,
            log_joint_constrained=0.0,
            bounds_constrained=(),
        )
        with pytest.raises(InvalidParameterError):
            oracle_bf_quadrature(problem)

    def test_diverging_integrand_reports_oracle_error(self):
        problem = QuadratureProblem(
            log_joint_unconstrained=lambda p: 0.0,  # non-integrable on R
            bounds_unconstrained=((-np.inf, np.inf),),
            log_joint_constrained=0.0,
            bounds_constrained=(),
        )
        with pytest.raises(OracleError):
            oracle_bf_quadrature(problem)
