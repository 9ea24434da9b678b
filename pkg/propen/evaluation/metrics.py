"""
Metrics of a design optimization method over a set of seeds and their final candidates.
"""

from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence

import pandas as pd
import torch
from torch import Tensor

from propen.datasets import KdeModel
from propen.methods import Trajectory
from propen.modules.dense_mlp import DTYPE

DEFAULT_TOLERANCE = 1e-6


@dataclass(frozen=True)
class EvalReport:
    """
    ratio_of_improvement, uniqueness and novelty are percentages. The nll_sum fields hold the
    summed log-likelihood of seeds and candidates under the likelihood model (higher is better).
    """

    ratio_of_improvement: float
    average_improvement: float
    uniqueness: float
    novelty: float
    nll_sum_seeds: float
    nll_sum_candidates: float

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)


def ratio_of_improvement(seed_properties: Tensor, candidate_properties: Tensor) -> float:
    """
    Percentage of candidates with a strictly better property than their seed.
    Args:
        seed_properties: shape (n_seeds,)
        candidate_properties: shape (n_seeds,), candidate i comes from seed i
    Returns:
        a percentage in [0, 100]. Ties are not improvements.
    """
    seed_properties, candidate_properties = _check_paired(
        seed_properties, candidate_properties
    )
    return 100 * float((candidate_properties > seed_properties).to(DTYPE).mean())


def average_improvement(seed_properties: Tensor, candidate_properties: Tensor) -> float:
    """Mean of candidate_property - seed_property."""
    seed_properties, candidate_properties = _check_paired(
        seed_properties, candidate_properties
    )
    return float((candidate_properties - seed_properties).mean())


def uniqueness(candidates: Tensor, tol: float = DEFAULT_TOLERANCE) -> float:
    """
    Percentage of distinct candidates. Candidates are clustered greedily in order: a candidate
    within tol (L-infinity) of an earlier class representative joins its class, otherwise it
    becomes a new representative.
    Args:
        candidates: shape (n_candidates, dimension)
        tol: nonnegative tolerance
    Returns:
        100 * number of classes / n_candidates
    """
    candidates = _check_candidates(candidates)
    representatives = candidates[:1]
    for candidate in candidates[1:]:
        distances = (representatives - candidate).abs().amax(dim=1)
        if not (distances <= tol).any():
            representatives = torch.cat([representatives, candidate[None, :]])
    return 100 * len(representatives) / len(candidates)


def novelty(
    candidates: Tensor, training_designs: Tensor, tol: float = DEFAULT_TOLERANCE
) -> float:
    """
    Percentage of candidates farther than tol (L-infinity) from every training design.
    Args:
        candidates: shape (n_candidates, dimension)
        training_designs: shape (n_training, dimension)
        tol: nonnegative tolerance
    """
    candidates = _check_candidates(candidates)
    training_designs = torch.as_tensor(training_designs, dtype=DTYPE)
    if len(training_designs) == 0:
        return 100.0
    if training_designs.shape[1] != candidates.shape[1]:
        raise ValueError(
            f"Candidates have {candidates.shape[1]} coordinates but training designs have {training_designs.shape[1]}."
        )
    min_distances = torch.cat(
        [
            (chunk[:, None, :] - training_designs[None, :, :]).abs().amax(dim=2).amin(dim=1)
            for chunk in candidates.split(256)
        ]
    )
    return 100 * float((min_distances > tol).to(DTYPE).mean())


def evaluate_candidates(
    seeds: Tensor,
    seed_properties: Tensor,
    candidates: Tensor,
    candidate_properties: Tensor,
    training_designs: Tensor,
    likelihood: KdeModel,
    tol: float = DEFAULT_TOLERANCE,
) -> EvalReport:
    """
    Compute all metrics for paired seeds and final candidates.
    Args:
        seeds: shape (n_seeds, dimension)
        seed_properties: shape (n_seeds,)
        candidates: shape (n_seeds, dimension), candidate i comes from seed i
        candidate_properties: shape (n_seeds,)
        training_designs: designs the method was trained on, for novelty
        likelihood: density model of the training data
        tol: tolerance of uniqueness and novelty
    """
    return EvalReport(
        ratio_of_improvement=ratio_of_improvement(seed_properties, candidate_properties),
        average_improvement=average_improvement(seed_properties, candidate_properties),
        uniqueness=uniqueness(candidates, tol),
        novelty=novelty(candidates, training_designs, tol),
        nll_sum_seeds=float(likelihood.log_density(seeds).sum()),
        nll_sum_candidates=float(likelihood.log_density(candidates).sum()),
    )


def evaluate_trajectories(
    trajectories: Sequence[Trajectory],
    seeds: Tensor,
    seed_properties: Tensor,
    training_designs: Tensor,
    likelihood: KdeModel,
    tol: float = DEFAULT_TOLERANCE,
) -> EvalReport:
    """
    Evaluate the final state of each trajectory against its seed. Seeds are passed explicitly
    since a trajectory may start from a reconstruction of its seed.
    """
    return evaluate_candidates(
        seeds,
        seed_properties,
        torch.stack([trajectory.final_state for trajectory in trajectories]),
        _final_properties(trajectories),
        training_designs,
        likelihood,
        tol,
    )


def per_step_metrics(
    trajectories: Sequence[Trajectory],
    seeds: Tensor,
    seed_properties: Tensor,
    training_designs: Tensor,
    likelihood: KdeModel,
    tol: float = DEFAULT_TOLERANCE,
    max_step: Optional[int] = None,
) -> pd.DataFrame:
    """
    Metrics of the candidates reached after each number of steps. Trajectories that stopped
    earlier contribute their final state.
    Args:
        trajectories: trajectories recorded with every state, with property values
        max_step: last step to report. Defaults to the longest trajectory.
    Returns:
        one row per step with the columns of EvalReport plus a leading step column
    """
    if max_step is None:
        max_step = max(len(trajectory.states) for trajectory in trajectories) - 1
    rows: List[Dict[str, float]] = []
    for step in range(1, max_step + 1):
        positions = [min(step, len(trajectory.states) - 1) for trajectory in trajectories]
        candidates = torch.stack(
            [
                trajectory.states[position]
                for trajectory, position in zip(trajectories, positions)
            ]
        )
        candidate_properties = torch.stack(
            [
                _require_property_values(trajectory)[position]
                for trajectory, position in zip(trajectories, positions)
            ]
        )
        report = evaluate_candidates(
            seeds,
            seed_properties,
            candidates,
            candidate_properties,
            training_designs,
            likelihood,
            tol,
        )
        rows.append({"step": step, **report.to_dict()})
    return pd.DataFrame(rows)


def _final_properties(trajectories: Sequence[Trajectory]) -> Tensor:
    return torch.stack(
        [_require_property_values(trajectory)[-1] for trajectory in trajectories]
    )


def _require_property_values(trajectory: Trajectory) -> Tensor:
    if trajectory.property_values is None:
        raise ValueError("Trajectories must be evaluated by an oracle before computing metrics.")
    return trajectory.property_values


def _check_paired(seed_properties: Tensor, candidate_properties: Tensor):
    seed_properties = torch.as_tensor(seed_properties, dtype=DTYPE).flatten()
    candidate_properties = torch.as_tensor(candidate_properties, dtype=DTYPE).flatten()
    if len(seed_properties) == 0:
        raise ValueError("Metrics need at least one (seed, candidate) pair.")
    if len(seed_properties) != len(candidate_properties):
        raise ValueError(
            f"Got {len(seed_properties)} seed properties but {len(candidate_properties)} candidate properties."
        )
    return seed_properties, candidate_properties


def _check_candidates(candidates: Tensor) -> Tensor:
    candidates = torch.as_tensor(candidates, dtype=DTYPE)
    if candidates.ndim != 2 or len(candidates) == 0:
        raise ValueError(
            f"Candidates must be a non-empty 2-dim tensor, got shape {tuple(candidates.shape)}."
        )
    return candidates
