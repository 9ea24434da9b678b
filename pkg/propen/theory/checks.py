"""
Numerical checks of the guarantees behind matched reconstruction: the closed-form per-seed
optimum, its step size as a function of the regularization, the direction of the step, and
the likelihood of the optimum.
"""

import math
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence

import pandas as pd
import torch
from torch import Tensor

from propen.datasets import AnalyticProperty, KdeModel
from propen.matching import MatchConfig, MatchedDataset, matched_seed_indices, require_matches
from propen.methods import tabular_minimizer
from propen.modules.dense_mlp import DTYPE
from propen.utils import cosine_similarity


@dataclass(frozen=True)
class ColinearityCheckConfig:
    """
    Regularity of the property g: lambda1 bounds ||grad g||, lambda2 bounds the Lipschitz
    constant of grad g. alpha is the target cosine between the step and the gradient, and
    delta_y_lower the lower bound on property gaps of matched pairs.
    """

    lambda1: float
    lambda2: float
    alpha: float
    delta_y_lower: float = 0.0

    def __post_init__(self):
        if not self.lambda1 > 0:
            raise ValueError(f"lambda1 must be positive, got {self.lambda1}.")
        if not self.lambda2 > 0:
            raise ValueError(f"lambda2 must be positive, got {self.lambda2}.")
        if not 0 < self.alpha <= 1:
            raise ValueError(f"alpha must be in (0, 1], got {self.alpha}.")
        if not self.delta_y_lower >= 0:
            raise ValueError(f"delta_y_lower must be nonnegative, got {self.delta_y_lower}.")


class BoundCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool


class ColinearityResult(NamedTuple):
    condition_met: bool
    achieved_cosine: float


def sample_ball(center: Tensor, radius: float, n_samples: int, rng_seed: int) -> Tensor:
    """Uniform samples in the euclidean ball of the given radius around center."""
    generator = torch.Generator().manual_seed(rng_seed)
    directions = torch.randn(n_samples, len(center), generator=generator, dtype=DTYPE)
    directions /= torch.linalg.vector_norm(directions, dim=1, keepdim=True)
    radii = radius * torch.rand(n_samples, 1, generator=generator, dtype=DTYPE) ** (
        1 / len(center)
    )
    return center + radii * directions


def thm1_direction_check(
    g: AnalyticProperty,
    seed: Tensor,
    radius: float,
    n_samples: int,
    rng_seed: int = 0,
) -> float:
    """
    Monte Carlo check that the mean improving neighbor of a seed points along the gradient.
    Neighbors are sampled uniformly within squared distance radius of the seed (so in the ball
    of radius sqrt(radius)), and only those with a strictly better property are kept.
    Args:
        g: property with a known gradient
        seed: shape (dimension,)
        radius: bound on the squared distance to the seed
        n_samples: number of sampled neighbors
        rng_seed: seed of the sampling
    Returns:
        the cosine between the mean kept displacement and grad g(seed)
    Raises:
        ValueError: if no sampled neighbor improves the property
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}.")
    seed = torch.as_tensor(seed, dtype=DTYPE)
    seed_value, gradient = g.value_and_gradient(seed)
    neighbors = sample_ball(seed, math.sqrt(radius), n_samples, rng_seed)
    improving = neighbors[g(neighbors) > seed_value]
    if len(improving) == 0:
        raise ValueError(
            "No sampled neighbor improves the property: the seed is a local maximum."
        )
    return cosine_similarity((improving - seed).mean(dim=0), gradient)


def _spectral_norm(symmetric_matrix: Tensor) -> float:
    return float(torch.linalg.eigvalsh(symmetric_matrix).abs().max())


def thm2_bound_check(
    matched: MatchedDataset, kde: KdeModel, seed_index: int, beta: float = 0.0
) -> BoundCheck:
    """
    Compare the density at a seed's closed-form optimum to the second-order lower bound
        mean density of the matches - ||Hessian of p at the optimum||_2 * variance of the matches / 2.
    Returns:
        lhs (density at the optimum), rhs (the bound) and whether lhs >= rhs
    Raises:
        UnmatchedSeedError: if the seed has no match
    """
    targets = require_matches(matched, seed_index)
    optimum = tabular_minimizer(matched, seed_index, beta)
    variance = float(((targets - targets.mean(dim=0)) ** 2).sum(dim=1).mean())
    lhs = float(kde.density(optimum))
    rhs = float(kde.density(targets).mean()) - _spectral_norm(
        kde.hessian(optimum)
    ) * variance / 2
    return BoundCheck(lhs, rhs, lhs >= rhs)


def corollary_step_scaling(
    matched: MatchedDataset, seed_index: int, betas: Sequence[float]
) -> List[float]:
    """
    Norm of the closed-form step ||f*_beta(x) - x|| for each beta. It scales as 1 / (1 + beta).
    """
    seed = matched.design_set.designs[seed_index]
    return [
        float(torch.linalg.vector_norm(tabular_minimizer(matched, seed_index, beta) - seed))
        for beta in betas
    ]


def colinearity_bound(
    config: ColinearityCheckConfig, mean_displacement_norm: float
) -> float:
    """
    Largest delta_x for which the step is guaranteed alpha-colinear with the gradient:
        2 * (delta_y_lower - alpha * lambda1 * ||E[x'] - x||) / lambda2
    """
    return (
        2
        * (config.delta_y_lower - config.alpha * config.lambda1 * mean_displacement_norm)
        / config.lambda2
    )


def colinearity_condition(
    config: ColinearityCheckConfig,
    match_config: MatchConfig,
    matched: MatchedDataset,
    seed_index: int,
    beta: float,
    g: AnalyticProperty,
) -> ColinearityResult:
    """
    Evaluate the sufficient condition delta_x < colinearity_bound(...) for one seed, and the
    cosine actually achieved between the closed-form step f*_beta(x) - x and grad g(x).
    The step is (E[x'] - x) / (1 + beta), so its direction and the condition do not depend on beta.
    Returns:
        whether the condition is met, and the achieved cosine (NaN for a zero step)
    Raises:
        UnmatchedSeedError: if the seed has no match
    """
    targets = require_matches(matched, seed_index)
    seed = matched.design_set.designs[seed_index]
    mean_displacement_norm = float(torch.linalg.vector_norm(targets.mean(dim=0) - seed))
    condition_met = match_config.delta_x < colinearity_bound(config, mean_displacement_norm)
    step = tabular_minimizer(matched, seed_index, beta) - seed
    _, gradient = g.value_and_gradient(seed)
    if torch.linalg.vector_norm(step) == 0 or torch.linalg.vector_norm(gradient) == 0:
        return ColinearityResult(condition_met, float("nan"))
    return ColinearityResult(condition_met, cosine_similarity(step, gradient))


def numerical_minimizer(matched: MatchedDataset, seed_index: int, beta: float) -> Tensor:
    """
    Minimize sum over matches x' of ||z - x'||^2 + beta * n_matches * ||z - x||^2 as a
    linear least-squares problem, without using its closed form.
    """
    targets = require_matches(matched, seed_index)
    seed = matched.design_set.designs[seed_index]
    dimension = len(seed)
    identity = torch.eye(dimension, dtype=DTYPE)
    regularization_weight = math.sqrt(beta * len(targets))
    system = torch.cat([identity.repeat(len(targets), 1), regularization_weight * identity])
    right_hand_side = torch.cat([targets.flatten(), regularization_weight * seed])
    return torch.linalg.lstsq(system, right_hand_side[:, None]).solution.flatten()


def match_distance_profile(matched: MatchedDataset) -> pd.DataFrame:
    """
    Euclidean distance of every matched pair, to inspect how isotropic matches are around
    their seed.
    Returns:
        columns source_index, target_index, distance
    """
    distances = torch.linalg.vector_norm(matched.targets() - matched.sources(), dim=1)
    profile = matched.to_dataframe()
    profile["distance"] = distances.numpy()
    return profile


def thm2_hold_rate(matched: MatchedDataset, kde: KdeModel, beta: float = 0.0) -> float:
    """Fraction of matched seeds for which the likelihood bound holds."""
    seeds = matched_seed_indices(matched)
    if len(seeds) == 0:
        raise ValueError("The matched dataset has no matched seed.")
    return sum(thm2_bound_check(matched, kde, seed, beta).holds for seed in seeds) / len(
        seeds
    )
