import math

import pytest
import torch

from propen.datasets import KdeModel, kde_log_density
from propen.modules.dense_mlp import DTYPE


class TestKdeModel:
    @staticmethod
    @pytest.mark.parametrize("bandwidth", [0.1, 1.0, 2.5])
    def test_single_center_is_a_gaussian(bandwidth):
        model = KdeModel(torch.zeros(1, 2), bandwidth)
        x = torch.tensor([0.3, -0.4], dtype=DTYPE)
        expected = -math.log(2 * math.pi * bandwidth**2) - 0.25 / (2 * bandwidth**2)
        assert kde_log_density(model, x) == pytest.approx(expected)

    @staticmethod
    def test_density_is_the_mean_of_the_kernels():
        model = KdeModel(torch.tensor([[0.0], [2.0]]), bandwidth=1.0)
        x = torch.tensor([1.0], dtype=DTYPE)
        expected = math.exp(-0.5) / math.sqrt(2 * math.pi)
        assert float(model.density(x)) == pytest.approx(expected)

    @staticmethod
    def test_far_queries_stay_finite():
        model = KdeModel(torch.zeros(3, 2), bandwidth=0.01)
        assert torch.isfinite(model.log_density(torch.tensor([100.0, 100.0])))

    @staticmethod
    def test_batch_agrees_with_single_points():
        centers = torch.randn(20, 3, generator=torch.Generator().manual_seed(0))
        model = KdeModel(centers, bandwidth=0.5)
        queries = torch.randn(5, 3, generator=torch.Generator().manual_seed(1), dtype=DTYPE)
        batch = model(queries)
        assert batch.shape == (5,)
        for query, value in zip(queries, batch):
            assert float(value) == pytest.approx(kde_log_density(model, query))

    @staticmethod
    @pytest.mark.parametrize("bandwidth", [0.3, 0.8])
    def test_density_integrates_to_one(bandwidth):
        centers = torch.randn(10, 2, generator=torch.Generator().manual_seed(3), dtype=DTYPE)
        model = KdeModel(centers, bandwidth)
        lows = centers.min(dim=0).values - 6 * bandwidth
        highs = centers.max(dim=0).values + 6 * bandwidth
        samples = lows + (highs - lows) * torch.rand(
            200_000, 2, generator=torch.Generator().manual_seed(4), dtype=DTYPE
        )
        integral = float(model.density(samples).mean() * (highs - lows).prod())
        assert integral == pytest.approx(1.0, rel=0.03)

    @staticmethod
    def test_gradient_and_hessian_match_autograd():
        centers = torch.randn(10, 2, generator=torch.Generator().manual_seed(2))
        model = KdeModel(centers, bandwidth=0.8)
        x = torch.tensor([0.2, 0.1], dtype=DTYPE)
        torch.testing.assert_close(
            model.gradient(x), torch.autograd.functional.jacobian(model.density, x)
        )
        torch.testing.assert_close(
            model.hessian(x), torch.autograd.functional.hessian(model.density, x)
        )

    @staticmethod
    @pytest.mark.parametrize(
        "centers,bandwidth",
        [(torch.empty(0, 2), 1.0), (torch.zeros(3), 1.0), (torch.zeros(3, 2), 0.0)],
    )
    def test_refuses_invalid_models(centers, bandwidth):
        with pytest.raises(ValueError):
            KdeModel(centers, bandwidth)

    @staticmethod
    def test_refuses_points_of_the_wrong_dimension():
        with pytest.raises(ValueError):
            KdeModel(torch.zeros(3, 2)).log_density(torch.zeros(3))

    @staticmethod
    def test_log_density_helper_refuses_batches():
        with pytest.raises(ValueError):
            kde_log_density(KdeModel(torch.zeros(3, 2)), torch.zeros(4, 2))


class TestKdeLogDensity:
    @staticmethod
    def test_value_at_a_single_center():
        model = KdeModel(torch.tensor([[1.0, -1.0]]), bandwidth=0.01)
        assert kde_log_density(model, torch.tensor([1.0, -1.0])) == pytest.approx(7.3724, abs=1e-4)

    @staticmethod
    def test_midpoint_of_symmetric_centers_matches_direct_summation():
        model = KdeModel(torch.tensor([[-1.0, 0.0], [1.0, 0.0]]), bandwidth=0.7)
        kernel = math.exp(-1 / (2 * 0.49)) / (2 * math.pi * 0.49)
        assert kde_log_density(model, torch.zeros(2)) == pytest.approx(math.log(kernel))

    @staticmethod
    def test_far_field_is_finite_and_lower_than_at_the_center():
        model = KdeModel(torch.zeros(1, 2), bandwidth=0.01)
        far_value = kde_log_density(model, torch.tensor([1.0, 0.0]))
        assert math.isfinite(far_value)
        assert far_value < kde_log_density(model, torch.zeros(2))
