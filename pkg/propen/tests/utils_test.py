import pytest
import torch

from propen.utils import cosine_similarity, sliding_average, squared_distances


class TestSlidingAverage:
    @staticmethod
    @pytest.mark.parametrize(
        "value_list,window,expected_mean",
        [
            ([0.1, 0.0, 1.0], 2, 0.5),
            ([0.1, 0.0, 1], 2, 0.5),
            ([0.1, 0.0, 1.0], 1, 1.0),
            ([0.0, 0.5, 1.0], 3, 0.5),
            ([0.0, 0.5, 1.0], 4, 0.5),
            ([0.0, 0.5, 1.0], 0, 0.5),
        ],
    )
    def test_returns_correct_mean(value_list, window, expected_mean):
        assert sliding_average(value_list, window) == expected_mean

    @staticmethod
    @pytest.mark.parametrize("value_list,window", [([], 2), ([], 0)])
    def test_refuses_illegal_values(value_list, window):
        with pytest.raises(ValueError):
            sliding_average(value_list, window)


class TestCosineSimilarity:
    @staticmethod
    @pytest.mark.parametrize(
        "first,second,expected",
        [
            ([1.0, 0.0], [2.0, 0.0], 1.0),
            ([1.0, 0.0], [0.0, 3.0], 0.0),
            ([1.0, 1.0], [-1.0, -1.0], -1.0),
        ],
    )
    def test_returns_cosine(first, second, expected):
        assert cosine_similarity(
            torch.tensor(first, dtype=torch.float64), torch.tensor(second, dtype=torch.float64)
        ) == pytest.approx(expected)

    @staticmethod
    def test_refuses_zero_vector():
        with pytest.raises(ValueError):
            cosine_similarity(torch.zeros(2), torch.ones(2))


class TestSquaredDistances:
    @staticmethod
    def test_identical_rows_are_at_distance_exactly_zero():
        points = torch.rand(20, 5, dtype=torch.float64) * 1e3
        assert (torch.diagonal(squared_distances(points, points)) == 0).all()

    @staticmethod
    def test_matches_hand_computation():
        queries = torch.tensor([[0.0, 0.0]], dtype=torch.float64)
        references = torch.tensor([[3.0, 4.0], [1.0, 0.0]], dtype=torch.float64)
        assert squared_distances(queries, references).tolist() == [[25.0, 1.0]]
