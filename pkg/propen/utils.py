"""
General utilities
"""

import random
from typing import List

import numpy as np
import torch
from torch import Tensor


def sliding_average(value_list: List[float], window: int) -> float:
    """
    Computes the average of the latest instances in a list
    Args:
        value_list: input list of floats (can't be empty)
        window: number of instances to take into account. If value is 0 or greater than
            the length of value_list, all instances will be taken into account.

    Returns:
        average of the last window instances in value_list

    Raises:
        ValueError: if the input list is empty
    """
    if len(value_list) == 0:
        raise ValueError("Cannot perform sliding average on an empty list.")
    return float(np.asarray(value_list[-window:]).mean())


def set_random_seed(seed: int):
    """
    Set random, numpy and torch random seed. Library functions take explicit seeds, this only
    protects code paths that fall back on global generators.
    Args:
        seed: defined random seed
    """
    np.random.seed(seed)
    torch.manual_seed(seed)
    random.seed(seed)


def cosine_similarity(first: Tensor, second: Tensor) -> float:
    """
    Cosine of the angle between two vectors.
    Raises:
        ValueError: if one of the vectors is zero
    """
    first_norm = torch.linalg.vector_norm(first)
    second_norm = torch.linalg.vector_norm(second)
    if first_norm == 0 or second_norm == 0:
        raise ValueError("The cosine similarity is undefined for a zero vector.")
    return float(torch.dot(first.flatten(), second.flatten()) / (first_norm * second_norm))


def squared_distances(queries: Tensor, references: Tensor) -> Tensor:
    """
    Exact squared euclidean distances between rows (no expansion of the square, so that
    identical rows give exactly 0).
    Args:
        queries: shape (n_queries, dim)
        references: shape (n_references, dim)
    Returns:
        shape (n_queries, n_references)
    """
    return ((queries[:, None, :] - references[None, :, :]) ** 2).sum(dim=-1)
