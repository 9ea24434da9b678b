import math

import pytest
import torch

from propen.datasets import DesignSet, Embedding, ToyConfig, ToyFamily, embed, generate_toy
from propen.datasets.toy_datasets import eight_gaussians_centers
from propen.modules.dense_mlp import DTYPE


class TestGenerateToy:
    @staticmethod
    def test_refuses_zero_samples():
        with pytest.raises(ValueError):
            ToyConfig(ToyFamily.PINWHEEL, n_samples=0)

    @staticmethod
    @pytest.mark.parametrize("family", list(ToyFamily))
    def test_same_seed_gives_identical_points(family):
        config = ToyConfig(family, n_samples=100, rng_seed=7)
        assert torch.equal(generate_toy(config).designs, generate_toy(config).designs)

    @staticmethod
    @pytest.mark.parametrize("family", ["pinwheel", "8gaussians"])
    def test_points_are_two_dimensional_without_properties(family):
        designs = generate_toy(ToyConfig(family, n_samples=30))
        assert designs.designs.shape == (30, 2)
        assert not designs.has_properties()

    @staticmethod
    def test_eight_gaussians_without_noise_sit_on_the_modes():
        designs = generate_toy(
            ToyConfig(ToyFamily.EIGHT_GAUSSIANS, n_samples=200, noise_scale=1e-12)
        )
        distances = torch.cdist(designs.designs, eight_gaussians_centers())
        assert (distances.min(dim=1).values < 1e-6).all()

    @staticmethod
    def test_eight_gaussians_modes_are_on_a_circle_of_radius_two():
        centers = eight_gaussians_centers()
        assert len(centers) == 8
        torch.testing.assert_close(
            torch.linalg.vector_norm(centers, dim=1), torch.full((8,), 2.0, dtype=DTYPE)
        )

    @staticmethod
    def test_pinwheel_has_five_arms():
        designs = generate_toy(
            ToyConfig(ToyFamily.PINWHEEL, n_samples=500, noise_scale=1e-3)
        ).designs
        # With little noise, every point lies near the tip of one of the five bent arms
        tip_angles = -(torch.arange(5, dtype=DTYPE) * (2 * math.pi / 5) + 0.25 * math.e)
        tips = torch.stack([tip_angles.cos(), tip_angles.sin()], dim=1)
        distances = torch.cdist(designs, tips)
        assert (distances.min(dim=1).values < 0.05).all()
        assert len(torch.unique(distances.argmin(dim=1))) == 5


class TestEmbed:
    @staticmethod
    def test_identity_embedding_keeps_points():
        designs = generate_toy(ToyConfig(n_samples=20))
        assert torch.equal(embed(designs, Embedding.identity()).designs, designs.designs)

    @staticmethod
    @pytest.mark.parametrize("target_dim", [10, 50, 100])
    def test_random_embedding_preserves_pairwise_distances(target_dim):
        designs = generate_toy(ToyConfig(ToyFamily.PINWHEEL, n_samples=100))
        embedded = embed(designs, Embedding.random(target_dim, seed=0))
        assert embedded.dimension == target_dim
        original = torch.cdist(designs.designs, designs.designs)
        preserved = torch.cdist(embedded.designs, embedded.designs)
        assert (original - preserved).abs().max() < 1e-9

    @staticmethod
    def test_zero_vector_maps_to_zero():
        zero = DesignSet(torch.zeros(1, 2))
        assert torch.equal(
            embed(zero, Embedding.random(50, seed=1)).designs, torch.zeros(1, 50, dtype=DTYPE)
        )

    @staticmethod
    def test_random_embedding_has_orthonormal_columns():
        matrix = Embedding.random(10, seed=2).matrix
        torch.testing.assert_close(
            matrix.T @ matrix, torch.eye(2, dtype=DTYPE), rtol=0, atol=1e-10
        )

    @staticmethod
    def test_refuses_non_orthonormal_matrix():
        with pytest.raises(ValueError):
            Embedding(torch.ones(3, 2))

    @staticmethod
    def test_refuses_non_planar_points():
        with pytest.raises(ValueError):
            embed(DesignSet(torch.zeros(4, 3)), Embedding.random(10, seed=0))
