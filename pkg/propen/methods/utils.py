from dataclasses import dataclass
from typing import Dict, List

import torch
from torch import Tensor

from propen.matching import MatchedDataset, require_matches
from propen.modules.dense_mlp import DTYPE


@dataclass(frozen=True)
class Standardizer:
    """Per-coordinate affine rescaling to zero mean and unit variance."""

    mean: Tensor
    scale: Tensor

    @classmethod
    def fit(cls, samples: Tensor) -> "Standardizer":
        """
        Args:
            samples: shape (n_samples, dimension), n_samples >= 1
        Returns:
            a Standardizer with the mean and population standard deviation of each coordinate.
                Constant coordinates keep a scale of 1.
        """
        samples = torch.as_tensor(samples, dtype=DTYPE)
        if samples.ndim != 2 or len(samples) == 0:
            raise ValueError(
                f"Standardization needs a non-empty 2-dim tensor, got shape {tuple(samples.shape)}."
            )
        scale = samples.std(dim=0, unbiased=False)
        scale[scale == 0] = 1.0
        return cls(samples.mean(dim=0), scale)

    @classmethod
    def identity(cls, dimension: int) -> "Standardizer":
        return cls(torch.zeros(dimension, dtype=DTYPE), torch.ones(dimension, dtype=DTYPE))

    @property
    def dimension(self) -> int:
        return len(self.mean)

    def transform(self, samples: Tensor) -> Tensor:
        return (torch.as_tensor(samples, dtype=DTYPE) - self.mean) / self.scale

    def inverse_transform(self, samples: Tensor) -> Tensor:
        return torch.as_tensor(samples, dtype=DTYPE) * self.scale + self.mean

    def to_dict(self) -> Dict[str, List[float]]:
        return {"mean": self.mean.tolist(), "scale": self.scale.tolist()}

    @classmethod
    def from_dict(cls, values: Dict[str, List[float]]) -> "Standardizer":
        return cls(
            torch.tensor(values["mean"], dtype=DTYPE),
            torch.tensor(values["scale"], dtype=DTYPE),
        )


def tabular_minimizer(matched: MatchedDataset, seed_index: int, beta: float) -> Tensor:
    """
    Closed-form minimizer over z of the regularized matched reconstruction objective of one seed x
        mean over matches x' of ||z - x'||^2 + beta * ||z - x||^2,
    which is (mean(x') + beta * x) / (1 + beta).
    Args:
        matched: the matched dataset
        seed_index: index of the seed x in the matched dataset's DesignSet
        beta: weight of the reconstruction regularizer, nonnegative
    Returns:
        the minimizer, of the same shape as the designs
    Raises:
        UnmatchedSeedError: if the seed has no match
    """
    if not beta >= 0:
        raise ValueError(f"beta must be nonnegative, got {beta}.")
    targets = require_matches(matched, seed_index)
    seed = matched.design_set.designs[seed_index]
    return (targets.mean(dim=0) + beta * seed) / (1 + beta)
