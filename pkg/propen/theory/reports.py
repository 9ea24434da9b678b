"""
Desk-scale sweeps of the theory checks, reported as rows check,instance,lhs,rhs,holds.
"""

from enum import Enum
from typing import Callable, Dict, List

import pandas as pd
import torch
from loguru import logger

from propen.datasets import (
    DesignSet,
    KdeModel,
    LinearProperty,
    QuadraticProperty,
    ToyConfig,
    ToyFamily,
    generate_toy,
)
from propen.matching import MatchConfig, build_matched_dataset, matched_seed_indices
from propen.methods import tabular_minimizer
from propen.modules.dense_mlp import DTYPE

from .checks import (
    ColinearityCheckConfig,
    colinearity_condition,
    corollary_step_scaling,
    numerical_minimizer,
    thm1_direction_check,
    thm2_bound_check,
)

CHECK_COLUMNS = ["check", "instance", "lhs", "rhs", "holds"]
COROLLARY_BETAS = (0.5, 1.0, 3.0)
# Smooth density and small neighborhoods, where the second-order bound is meaningful
THM2_BANDWIDTH = 0.1
THM2_DELTA_X = 0.01


class TheoryCheck(str, Enum):
    THM1 = "thm1"
    THM2 = "thm2"
    COROLLARY = "corollary"
    CLOSED_FORM = "closed-form"
    COLINEARITY = "colinearity"


def _random_instance(rng_seed: int, n_designs: int = 30, dimension: int = 3):
    generator = torch.Generator().manual_seed(rng_seed)
    designs = torch.rand(n_designs, dimension, generator=generator, dtype=DTYPE)
    properties = torch.rand(n_designs, generator=generator, dtype=DTYPE)
    return build_matched_dataset(
        DesignSet(designs, properties), MatchConfig(delta_x=0.5, delta_y=1.0)
    )


def thm1_rows(rng_seed: int) -> List[Dict]:
    rows = []
    for dimension in (2, 10):
        generator = torch.Generator().manual_seed(rng_seed + dimension)
        g = LinearProperty(torch.randn(dimension, generator=generator, dtype=DTYPE))
        seed = torch.randn(dimension, generator=generator, dtype=DTYPE)
        cosine = thm1_direction_check(g, seed, 0.1, 10_000, rng_seed)
        rows.append(
            {
                "check": TheoryCheck.THM1.value,
                "instance": f"linear_d{dimension}",
                "lhs": cosine,
                "rhs": 0.95,
                "holds": cosine > 0.95,
            }
        )
    return rows


def thm2_rows(rng_seed: int) -> List[Dict]:
    data = generate_toy(ToyConfig(ToyFamily.PINWHEEL, n_samples=200, rng_seed=rng_seed))
    kde = KdeModel(data.designs, bandwidth=THM2_BANDWIDTH)
    data = data.with_properties(kde.log_density(data.designs))
    matched = build_matched_dataset(data, MatchConfig(delta_x=THM2_DELTA_X, delta_y=1.0))
    rows = []
    for seed_index in matched_seed_indices(matched):
        check = thm2_bound_check(matched, kde, seed_index, 0.0)
        rows.append(
            {
                "check": TheoryCheck.THM2.value,
                "instance": f"pinwheel_seed{seed_index}",
                **check._asdict(),
            }
        )
    return rows


def corollary_rows(rng_seed: int) -> List[Dict]:
    matched = _random_instance(rng_seed)
    rows = []
    for seed_index in matched_seed_indices(matched):
        base_norm, *scaled_norms = corollary_step_scaling(
            matched, seed_index, (0.0,) + COROLLARY_BETAS
        )
        for beta, norm in zip(COROLLARY_BETAS, scaled_norms):
            ratio = base_norm / norm if norm > 0 else float("nan")
            rows.append(
                {
                    "check": TheoryCheck.COROLLARY.value,
                    "instance": f"seed{seed_index}_beta{beta}",
                    "lhs": ratio,
                    "rhs": 1 + beta,
                    "holds": norm == 0 or abs(ratio - (1 + beta)) <= 1e-12 * (1 + beta),
                }
            )
    return rows


def closed_form_rows(rng_seed: int, n_instances: int = 1000) -> List[Dict]:
    """One random matched dataset per instance, checked at its first matched seed."""
    rows = []
    betas = (0.0,) + COROLLARY_BETAS
    for instance in range(n_instances):
        matched = _random_instance(rng_seed + instance, dimension=2 + instance % 4)
        seed_indices = matched_seed_indices(matched)
        if not seed_indices:
            continue
        beta = betas[(instance // 4) % len(betas)]
        error = float(
            (
                tabular_minimizer(matched, seed_indices[0], beta)
                - numerical_minimizer(matched, seed_indices[0], beta)
            )
            .abs()
            .max()
        )
        rows.append(
            {
                "check": TheoryCheck.CLOSED_FORM.value,
                "instance": f"instance{instance}_seed{seed_indices[0]}_beta{beta}",
                "lhs": error,
                "rhs": 1e-8,
                "holds": error <= 1e-8,
            }
        )
    return rows


def colinearity_rows(rng_seed: int, n_instances: int = 100) -> List[Dict]:
    """
    Random quadratic properties, nearly linear over the unit square. "holds" is the implication
    condition met => cosine >= alpha.
    """
    rows = []
    alpha = 0.5
    # A narrow band of property gaps keeps the mean step short relative to delta_y_lower
    match_config = MatchConfig(delta_x=0.01, delta_y=0.03, delta_y_lower=0.02)
    for instance in range(n_instances):
        generator = torch.Generator().manual_seed(rng_seed + instance)
        factor = torch.randn(2, 2, generator=generator, dtype=DTYPE)
        g = QuadraticProperty(
            0.01 * factor @ factor.T,
            10 * torch.randn(2, generator=generator, dtype=DTYPE),
        )
        designs = torch.rand(200, 2, generator=generator, dtype=DTYPE)
        matched = build_matched_dataset(DesignSet(designs, g(designs)), match_config)
        for seed_index in matched_seed_indices(matched)[:5]:
            _, gradient = g.value_and_gradient(designs[seed_index])
            config = ColinearityCheckConfig(
                lambda1=max(float(torch.linalg.vector_norm(gradient)), 1e-12),
                lambda2=max(g.smoothness(), 1e-12),
                alpha=alpha,
                delta_y_lower=match_config.delta_y_lower,
            )
            result = colinearity_condition(
                config, match_config, matched, seed_index, 0.0, g
            )
            rows.append(
                {
                    "check": TheoryCheck.COLINEARITY.value,
                    "instance": f"quadratic{instance}_seed{seed_index}",
                    "lhs": result.achieved_cosine,
                    "rhs": alpha,
                    "holds": (not result.condition_met)
                    or result.achieved_cosine >= alpha,
                }
            )
    return rows


CHECK_RUNNERS: Dict[TheoryCheck, Callable[[int], List[Dict]]] = {
    TheoryCheck.THM1: thm1_rows,
    TheoryCheck.THM2: thm2_rows,
    TheoryCheck.COROLLARY: corollary_rows,
    TheoryCheck.CLOSED_FORM: closed_form_rows,
    TheoryCheck.COLINEARITY: colinearity_rows,
}


def run_theory_check(which: TheoryCheck, rng_seed: int = 0) -> pd.DataFrame:
    """
    Run one sweep of theory checks.
    Returns:
        one row per checked instance, with columns check, instance, lhs, rhs, holds
    """
    rows = CHECK_RUNNERS[TheoryCheck(which)](rng_seed)
    report = pd.DataFrame(rows, columns=CHECK_COLUMNS)
    if len(report) > 0:
        logger.info(
            f"{which}: condition holds on {report['holds'].sum()} of {len(report)} instances"
        )
    return report
