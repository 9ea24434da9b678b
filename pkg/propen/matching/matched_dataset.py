from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import pandas as pd
import torch
from torch import Tensor

from propen.datasets import DesignSet
from propen.exceptions import UnmatchedSeedError
from propen.modules.dense_mlp import DTYPE
from propen.utils import squared_distances

# Rows of the distance matrix computed at once, to bound memory on large design sets
SOURCE_CHUNK_SIZE = 256


@dataclass(frozen=True)
class MatchConfig:
    """
    Matching thresholds. A pair (x, x') is matched when
        ||x' - x||^2 <= delta_x  and  delta_y_lower < g(x') - g(x) <= delta_y.
    Note that delta_x bounds the SQUARED euclidean distance.
    """

    delta_x: float
    delta_y: float
    delta_y_lower: float = 0.0

    def __post_init__(self):
        if not self.delta_x > 0:
            raise ValueError(f"delta_x must be positive, got {self.delta_x}.")
        if not 0 <= self.delta_y_lower < self.delta_y:
            raise ValueError(
                "Matching thresholds must satisfy 0 <= delta_y_lower < delta_y, "
                f"got delta_y_lower={self.delta_y_lower} and delta_y={self.delta_y}."
            )


class MatchedDataset:
    """
    Ordered pairs (source_index, target_index) of designs of a DesignSet, where the target is
    a close design with a better property. Pairs are sorted lexicographically.
    """

    def __init__(self, pairs: Tensor, design_set: DesignSet):
        """
        Args:
            pairs: integer tensor of shape (n_pairs, 2)
            design_set: the DesignSet the indices point into
        """
        pairs = torch.as_tensor(pairs, dtype=torch.long).reshape(-1, 2)
        if len(pairs) > 0 and (pairs.min() < 0 or pairs.max() >= len(design_set)):
            raise ValueError(
                f"Pair indices must be in [0, {len(design_set)}), got values in "
                f"[{int(pairs.min())}, {int(pairs.max())}]."
            )
        self.pairs = pairs
        self.design_set = design_set

    def __len__(self) -> int:
        return len(self.pairs)

    def sources(self) -> Tensor:
        """Source designs of all pairs, shape (n_pairs, dimension)."""
        return self.design_set.designs[self.pairs[:, 0]]

    def targets(self) -> Tensor:
        return self.design_set.designs[self.pairs[:, 1]]

    def source_properties(self) -> Tensor:
        return self.design_set.require_properties()[self.pairs[:, 0]]

    def target_properties(self) -> Tensor:
        return self.design_set.require_properties()[self.pairs[:, 1]]

    def as_list(self) -> List[Tuple[int, int]]:
        return [(int(source), int(target)) for source, target in self.pairs]

    def to_dataframe(self) -> pd.DataFrame:
        return pd.DataFrame(
            self.pairs.numpy().reshape(-1, 2), columns=["source_index", "target_index"]
        )

    def to_csv(self, path: Union[Path, str]) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_dataframe().to_csv(path, index=False)


def build_matched_dataset(data: DesignSet, config: MatchConfig) -> MatchedDataset:
    """
    Collect all ordered pairs (i, j) of designs such that ||x_j - x_i||^2 <= delta_x and
    delta_y_lower < y_j - y_i <= delta_y. No pair is dropped.
    The distance matrix is computed by blocks of source rows, which gives the same pairs as
    the exhaustive double loop.
    Args:
        data: designs with property values
        config: matching thresholds
    Returns:
        the matched dataset, with pairs in lexicographic order of (i, j)
    """
    if len(data) == 0:
        return MatchedDataset(torch.empty(0, 2, dtype=torch.long), data)
    properties = data.require_properties()

    pair_blocks = []
    for start in range(0, len(data), SOURCE_CHUNK_SIZE):
        sources = slice(start, start + SOURCE_CHUNK_SIZE)
        distances = squared_distances(data.designs[sources], data.designs)
        gaps = properties[None, :] - properties[sources, None]
        is_match = (
            (distances <= config.delta_x)
            & (gaps > config.delta_y_lower)
            & (gaps <= config.delta_y)
        )
        block = is_match.nonzero()
        block[:, 0] += start
        pair_blocks.append(block)

    return MatchedDataset(torch.cat(pair_blocks), data)


def matches_of(matched: MatchedDataset, seed_index: int) -> Tensor:
    """
    Targets matched to one seed.
    Args:
        matched: the matched dataset
        seed_index: index of the seed in the matched dataset's DesignSet
    Returns:
        tensor of shape (n_matches, dimension), with zero rows if the seed is unmatched
    Raises:
        IndexError: if seed_index is out of range
    """
    if not 0 <= seed_index < len(matched.design_set):
        raise IndexError(
            f"seed_index must be in [0, {len(matched.design_set)}), got {seed_index}."
        )
    target_indices = matched.pairs[matched.pairs[:, 0] == seed_index, 1]
    return matched.design_set.designs[target_indices]


def match_variance(matched: MatchedDataset, seed_index: int) -> float:
    """
    Spread of a seed's matches: mean squared distance of the matches to their mean.
    Raises:
        UnmatchedSeedError: if the seed has no match
    """
    targets = require_matches(matched, seed_index)
    return float(((targets - targets.mean(dim=0)) ** 2).sum(dim=1).mean())


def matched_seed_indices(matched: MatchedDataset, min_matches: int = 1) -> List[int]:
    """Sorted indices of the designs that are the source of at least min_matches pairs."""
    counts = torch.bincount(matched.pairs[:, 0], minlength=len(matched.design_set))
    return (counts >= min_matches).nonzero().flatten().tolist()


def require_matches(matched: MatchedDataset, seed_index: int) -> Tensor:
    """Matches of a seed, which must have at least one."""
    targets = matches_of(matched, seed_index)
    if len(targets) == 0:
        raise UnmatchedSeedError(seed_index)
    return targets.to(DTYPE)
