import pandas as pd
import pytest
import torch

from propen.datasets import DesignSet
from propen.modules.dense_mlp import DTYPE


class TestDesignSet:
    @staticmethod
    @pytest.mark.parametrize(
        "designs,properties",
        [
            (torch.zeros(3), None),
            (torch.zeros(3, 2), torch.zeros(2)),
            (torch.tensor([[0.0, float("inf")]]), None),
            (torch.zeros(1, 2), torch.tensor([float("nan")])),
        ],
    )
    def test_refuses_invalid_inputs(designs, properties):
        with pytest.raises(ValueError):
            DesignSet(designs, properties)

    @staticmethod
    def test_accepts_empty_set():
        assert len(DesignSet(torch.empty(0, 3), torch.empty(0))) == 0

    @staticmethod
    def test_csv_has_design_columns_and_property(tmp_path):
        designs = DesignSet(torch.tensor([[1.0, 2.0], [3.0, 4.0]]), torch.tensor([0.5, 0.7]))
        designs.to_csv(tmp_path / "designs.csv")
        dataframe = pd.read_csv(tmp_path / "designs.csv")
        assert list(dataframe.columns) == ["x0", "x1", "y"]
        loaded = DesignSet.read_csv(tmp_path / "designs.csv")
        assert torch.equal(loaded.designs, designs.designs)
        assert torch.equal(loaded.properties, designs.properties)

    @staticmethod
    def test_csv_without_properties_reads_back_without_properties(tmp_path):
        DesignSet(torch.ones(2, 3)).to_csv(tmp_path / "designs.csv")
        assert not DesignSet.read_csv(tmp_path / "designs.csv").has_properties()

    @staticmethod
    def test_getitem_returns_design_and_property():
        design, value = DesignSet(torch.eye(2), torch.tensor([3.0, 4.0]))[1]
        assert torch.equal(design, torch.tensor([0.0, 1.0], dtype=DTYPE))
        assert value == 4.0


class TestTrainHoldoutSplit:
    @staticmethod
    @pytest.mark.parametrize("n_designs,fraction,expected_holdout", [(10, 0.2, 2), (3, 0.1, 1), (5, 0.99, 4)])
    def test_split_sizes(n_designs, fraction, expected_holdout):
        designs = DesignSet(torch.arange(n_designs, dtype=DTYPE)[:, None])
        train_set, holdout_set = designs.train_holdout_split(fraction, seed=0)
        assert len(holdout_set) == expected_holdout
        assert len(train_set) == n_designs - expected_holdout

    @staticmethod
    def test_split_is_a_deterministic_partition():
        designs = DesignSet(torch.arange(50, dtype=DTYPE)[:, None], torch.arange(50.0))
        train_set, holdout_set = designs.train_holdout_split(0.2, seed=3)
        values = torch.cat([train_set.designs, holdout_set.designs]).flatten()
        assert sorted(values.tolist()) == list(range(50))
        assert torch.equal(train_set.properties, train_set.designs.flatten())
        assert torch.equal(
            holdout_set.designs, designs.train_holdout_split(0.2, seed=3)[1].designs
        )

    @staticmethod
    @pytest.mark.parametrize("fraction", [0.0, 1.0])
    def test_refuses_degenerate_fractions(fraction):
        with pytest.raises(ValueError):
            DesignSet(torch.zeros(5, 1)).train_holdout_split(fraction, seed=0)
