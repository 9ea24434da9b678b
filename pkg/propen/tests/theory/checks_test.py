import math

import pytest
import torch

from propen.datasets import DesignSet, KdeModel, LinearProperty, QuadraticProperty
from propen.matching import MatchConfig, build_matched_dataset
from propen.methods import tabular_minimizer
from propen.modules.dense_mlp import DTYPE
from propen.theory import (
    ColinearityCheckConfig,
    colinearity_bound,
    colinearity_condition,
    corollary_step_scaling,
    match_distance_profile,
    numerical_minimizer,
    sample_ball,
    thm1_direction_check,
    thm2_bound_check,
    thm2_hold_rate,
)


def seed_with_two_matches():
    data = DesignSet(
        torch.tensor([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]]), torch.tensor([0.0, 1.0, 1.0])
    )
    return build_matched_dataset(data, MatchConfig(4.0, 1.0))


def symmetric_matches_around_a_mode():
    """Seed at the origin, matched to two points symmetric around the mode (0, 1) of a gaussian."""
    data = DesignSet(
        torch.tensor([[0.0, 0.0], [-0.1, 1.0], [0.1, 1.0]]), torch.tensor([0.0, 1.0, 1.0])
    )
    matched = build_matched_dataset(data, MatchConfig(2.0, 2.0))
    return matched, KdeModel(torch.tensor([[0.0, 1.0]]), bandwidth=1.0)


class TestSampleBall:
    @staticmethod
    @pytest.mark.parametrize("dimension", [1, 2, 10])
    def test_samples_stay_in_the_ball(dimension):
        center = torch.ones(dimension, dtype=DTYPE)
        samples = sample_ball(center, 0.5, 1000, rng_seed=0)
        assert samples.shape == (1000, dimension)
        assert (torch.linalg.vector_norm(samples - center, dim=1) <= 0.5).all()


class TestThm1DirectionCheck:
    @staticmethod
    @pytest.mark.parametrize("dimension", [2, 5, 10])
    def test_linear_property_gives_the_gradient_direction(dimension):
        generator = torch.Generator().manual_seed(dimension)
        g = LinearProperty(torch.randn(dimension, generator=generator, dtype=DTYPE))
        seed = torch.randn(dimension, generator=generator, dtype=DTYPE)
        assert thm1_direction_check(g, seed, 0.1, 10_000, rng_seed=0) > 0.95

    @staticmethod
    def test_first_axis_property_gives_a_positive_cosine():
        g = LinearProperty(torch.tensor([1.0, 0.0]))
        assert thm1_direction_check(g, torch.zeros(2), 1.0, 100, rng_seed=3) > 0

    @staticmethod
    def test_more_samples_give_a_better_direction():
        g = LinearProperty(torch.ones(10))
        seed = torch.zeros(10)

        def mean_cosine(n_samples):
            return sum(
                thm1_direction_check(g, seed, 1.0, n_samples, rng_seed) for rng_seed in range(20)
            ) / 20

        assert mean_cosine(100_000) > mean_cosine(1_000)

    @staticmethod
    def test_maximum_of_a_concave_quadratic_raises():
        g = QuadraticProperty(torch.eye(2), torch.zeros(2))
        with pytest.raises(ValueError):
            thm1_direction_check(g, torch.zeros(2), 0.1, 1000)


class TestThm2BoundCheck:
    @staticmethod
    def test_single_match_is_tight():
        data = DesignSet(torch.tensor([[0.0], [0.5], [3.0]]), torch.tensor([0.0, 0.3, 1.0]))
        matched = build_matched_dataset(data, MatchConfig(1.0, 0.5))
        kde = KdeModel(data.designs, bandwidth=0.5)
        check = thm2_bound_check(matched, kde, 0)
        assert check.lhs == pytest.approx(float(kde.density(torch.tensor([0.5]))))
        assert check.lhs == pytest.approx(check.rhs)

    @staticmethod
    def test_symmetric_matches_around_a_mode_hold_strictly():
        matched, kde = symmetric_matches_around_a_mode()
        check = thm2_bound_check(matched, kde, 0)
        assert check.holds
        assert check.lhs > check.rhs
        assert check.lhs == pytest.approx(1 / (2 * math.pi))

    @staticmethod
    def test_hold_rate():
        matched, kde = symmetric_matches_around_a_mode()
        assert thm2_hold_rate(matched, kde) == 1.0


class TestCorollaryStepScaling:
    @staticmethod
    def test_step_shrinks_as_one_over_one_plus_beta():
        norms = corollary_step_scaling(seed_with_two_matches(), 0, [0.0, 1.0, 3.0])
        assert norms[0] / norms[1] == pytest.approx(2.0, rel=1e-12)
        assert norms[0] / norms[2] == pytest.approx(4.0, rel=1e-12)

    @staticmethod
    @pytest.mark.parametrize("beta", [0.0, 0.5, 1.0, 3.0])
    def test_numerical_minimizer_agrees_with_the_closed_form(beta):
        generator = torch.Generator().manual_seed(int(10 * beta))
        data = DesignSet(
            torch.rand(50, 4, generator=generator, dtype=DTYPE),
            torch.rand(50, generator=generator, dtype=DTYPE),
        )
        matched = build_matched_dataset(data, MatchConfig(0.8, 1.0))
        for seed_index in matched.pairs[:, 0].unique()[:10].tolist():
            torch.testing.assert_close(
                numerical_minimizer(matched, seed_index, beta),
                tabular_minimizer(matched, seed_index, beta),
                rtol=0,
                atol=1e-8,
            )


class TestColinearity:
    @staticmethod
    def test_zero_gap_lower_bound_never_meets_the_condition():
        config = ColinearityCheckConfig(lambda1=1.0, lambda2=1.0, alpha=0.5, delta_y_lower=0.0)
        assert colinearity_bound(config, 0.3) < 0
        result = colinearity_condition(
            config,
            MatchConfig(4.0, 1.0),
            seed_with_two_matches(),
            0,
            0.0,
            LinearProperty(torch.ones(2)),
        )
        assert not result.condition_met
        assert result.achieved_cosine == pytest.approx(1.0)

    @staticmethod
    def test_nearly_linear_property_allows_any_neighborhood():
        config = ColinearityCheckConfig(lambda1=1.0, lambda2=1e-9, alpha=0.5, delta_y_lower=0.1)
        assert colinearity_bound(config, 0.1) > 1e6

    @staticmethod
    def test_met_condition_implies_colinearity():
        n_met = 0
        for instance in range(100):
            generator = torch.Generator().manual_seed(instance)
            factor = torch.randn(2, 2, generator=generator, dtype=DTYPE)
            g = QuadraticProperty(
                0.01 * factor @ factor.T, 10 * torch.randn(2, generator=generator, dtype=DTYPE)
            )
            designs = torch.rand(200, 2, generator=generator, dtype=DTYPE)
            match_config = MatchConfig(0.01, 0.03, delta_y_lower=0.02)
            matched = build_matched_dataset(DesignSet(designs, g(designs)), match_config)
            for seed_index in matched.pairs[:, 0].unique()[:10].tolist():
                _, gradient = g.value_and_gradient(designs[seed_index])
                config = ColinearityCheckConfig(
                    lambda1=float(torch.linalg.vector_norm(gradient)),
                    lambda2=g.smoothness(),
                    alpha=0.5,
                    delta_y_lower=0.02,
                )
                result = colinearity_condition(config, match_config, matched, seed_index, 0.0, g)
                if result.condition_met:
                    n_met += 1
                    assert result.achieved_cosine >= 0.5
        assert n_met > 0

    @staticmethod
    @pytest.mark.parametrize(
        "lambda1,lambda2,alpha,delta_y_lower",
        [(0.0, 1.0, 0.5, 0.1), (1.0, 0.0, 0.5, 0.1), (1.0, 1.0, 0.0, 0.1), (1.0, 1.0, 0.5, -0.1)],
    )
    def test_config_refuses_invalid_values(lambda1, lambda2, alpha, delta_y_lower):
        with pytest.raises(ValueError):
            ColinearityCheckConfig(lambda1, lambda2, alpha, delta_y_lower)


def test_match_distance_profile():
    profile = match_distance_profile(seed_with_two_matches())
    assert list(profile.columns) == ["source_index", "target_index", "distance"]
    assert profile["distance"].tolist() == pytest.approx([2.0, 2.0])
