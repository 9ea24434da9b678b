"""
Seeded repetitions of the design optimization benchmark: generate data, match it, train every
method, optimize the holdout designs and evaluate the candidates.
"""

import dataclasses
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import pandas as pd
from loguru import logger
from torch import Tensor

from propen.datasets import (
    DesignSet,
    Embedding,
    KdeModel,
    SyntheticAirfoilProperty,
    ToyConfig,
    ToyFamily,
    embed,
    generate_toy,
    random_airfoils,
)
from propen.evaluation import evaluate_trajectories, per_step_metrics
from propen.exceptions import EmptyMatchedDatasetError
from propen.matching import MatchConfig, MatchedDataset, build_matched_dataset
from propen.methods import (
    DesignOptimizer,
    GuidanceConfig,
    IoMode,
    OptimizeConfig,
    PropEnVariant,
    TabularPropEn,
    train_explicit,
    train_propen,
    trajectories_to_csv,
)
from propen.modules import (
    AIRFOIL_ARCHITECTURE,
    TOY_ARCHITECTURE,
    ArchitectureSpec,
    TrainConfig,
)
from propen.utils import set_random_seed
from scripts.utils import (
    EXPERIMENT_CONFIGS_DIR,
    InvalidConfigError,
    build_section,
    output_dir_override,
    read_json_config,
    unroll_grid,
)

AIRFOIL_FAMILY = "airfoil"
DATASET_FAMILIES = {family.value for family in ToyFamily} | {AIRFOIL_FAMILY}
PROPEN_METHODS = {"x2x", "xy2xy", "mix_x2x", "mix_xy2xy"}
EXPLICIT_METHOD = "explicit"
# Property KDE of the toy experiments. Narrower kernels fitted on a few hundred designs give
# every training design the same log-density, hence no matched pair.
TOY_PROPERTY_BANDWIDTH = 0.3
TABULAR_METHOD = "tabular"
ABLATION_KEYS = {"delta_x", "delta_y", "n_samples", "target_dim"}
SUMMARY_KEYS = ["method", "family", "n_samples", "target_dim", "delta_x", "delta_y"]
METRIC_COLUMNS = [
    "ratio_of_improvement",
    "average_improvement",
    "uniqueness",
    "novelty",
    "nll_sum_seeds",
    "nll_sum_candidates",
]
TOP_LEVEL_KEYS = {
    "dataset",
    "matching",
    "architecture",
    "training",
    "optimization",
    "evaluation",
    "methods",
    "repetitions",
    "holdout_fraction",
    "output_dir",
    "n_workers",
    "ablation",
}


@dataclass(frozen=True)
class DatasetSpec:
    """
    family is pinwheel, 8gaussians or airfoil. Toy designs are embedded in target_dim
    dimensions; airfoils have 2 * n_points coordinates. rng_seed + r seeds repetition r.
    """

    family: str = ToyFamily.EIGHT_GAUSSIANS.value
    n_samples: int = 200
    target_dim: int = 2
    noise_scale: float = 0.1
    rng_seed: int = 0
    kde_bandwidth: float = TOY_PROPERTY_BANDWIDTH
    n_points: int = 200
    angle_of_attack: float = 4.0

    def __post_init__(self):
        if self.family not in DATASET_FAMILIES:
            raise ValueError(
                f"family must be one of {sorted(DATASET_FAMILIES)}, got {self.family}."
            )
        if self.n_samples < 2:
            raise ValueError(f"n_samples must be at least 2, got {self.n_samples}.")
        if self.target_dim < 2:
            raise ValueError(f"target_dim must be at least 2, got {self.target_dim}.")
        if not self.noise_scale > 0:
            raise ValueError(f"noise_scale must be positive, got {self.noise_scale}.")
        if self.rng_seed < 0:
            raise ValueError(f"rng_seed must be unsigned, got {self.rng_seed}.")
        if not self.kde_bandwidth > 0:
            raise ValueError(f"kde_bandwidth must be positive, got {self.kde_bandwidth}.")
        if self.n_points < 4 or self.n_points % 2 != 0:
            raise ValueError(f"n_points must be an even integer >= 4, got {self.n_points}.")

    @property
    def is_airfoil(self) -> bool:
        return self.family == AIRFOIL_FAMILY

    @property
    def design_dimension(self) -> int:
        return 2 * self.n_points if self.is_airfoil else self.target_dim


@dataclass(frozen=True)
class EvaluationSpec:
    """likelihood_bandwidth defaults to the dataset's kde_bandwidth."""

    tolerance: float = 1e-6
    likelihood_bandwidth: Optional[float] = None

    def __post_init__(self):
        if not self.tolerance >= 0:
            raise ValueError(f"tolerance must be nonnegative, got {self.tolerance}.")
        if self.likelihood_bandwidth is not None and not self.likelihood_bandwidth > 0:
            raise ValueError(
                f"likelihood_bandwidth must be positive, got {self.likelihood_bandwidth}."
            )


@dataclass(frozen=True)
class MethodSpec:
    """
    name is one of x2x, xy2xy, mix_x2x, mix_xy2xy, explicit or tabular.
    mix_beta is used by mix variants, step_size, n_steps and max_gradient_norm by explicit, beta
    by tabular.
    """

    name: str
    mix_beta: float = 1.0
    step_size: float = 0.01
    n_steps: int = 30
    beta: float = 0.0
    max_gradient_norm: Optional[float] = 1.0

    def __post_init__(self):
        known_methods = PROPEN_METHODS | {EXPLICIT_METHOD, TABULAR_METHOD}
        if self.name not in known_methods:
            raise ValueError(
                f"method name must be one of {sorted(known_methods)}, got {self.name}."
            )
        if self.name.startswith("mix_") and not self.mix_beta > 0:
            raise ValueError(f"{self.name} needs a positive mix_beta, got {self.mix_beta}.")
        self.guidance_config()
        if not self.beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {self.beta}.")

    def propen_variant(self) -> PropEnVariant:
        io_mode = IoMode(self.name.replace("mix_", ""))
        return PropEnVariant(io_mode, self.mix_beta if self.name.startswith("mix_") else 0.0)

    def guidance_config(self) -> GuidanceConfig:
        return GuidanceConfig(self.step_size, self.n_steps, self.max_gradient_norm)


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: DatasetSpec
    matching: MatchConfig
    architecture: ArchitectureSpec
    training: TrainConfig
    optimization: OptimizeConfig
    evaluation: EvaluationSpec
    methods: Tuple[MethodSpec, ...]
    repetitions: int = 10
    holdout_fraction: float = 0.2
    output_dir: Path = Path("results")
    n_workers: int = 1
    ablation: Dict[str, list] = field(default_factory=dict)

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be positive, got {self.repetitions}.")
        if not 0 < self.holdout_fraction < 1:
            raise ValueError(
                f"holdout_fraction must be in (0, 1), got {self.holdout_fraction}."
            )
        if self.n_workers < 1:
            raise ValueError(f"n_workers must be positive, got {self.n_workers}.")
        if len(self.methods) == 0:
            raise ValueError("At least one method is needed.")
        unknown_keys = sorted(set(self.ablation) - ABLATION_KEYS)
        if unknown_keys:
            raise ValueError(
                f"Unknown ablation keys {unknown_keys}. Allowed keys are {sorted(ABLATION_KEYS)}."
            )
        for key, values in self.ablation.items():
            if not isinstance(values, list) or len(values) == 0:
                raise ValueError(f"Ablation values of {key} must be a non-empty list.")


def parse_experiment_config(raw_config: Dict[str, Any]) -> ExperimentConfig:
    """
    Build an ExperimentConfig from a parsed JSON object. Missing sections take their defaults;
    the architecture defaults depend on the dataset family.
    Raises:
        InvalidConfigError: with the name of the offending section or key
    """
    unknown_keys = sorted(set(raw_config) - TOP_LEVEL_KEYS)
    if unknown_keys:
        raise InvalidConfigError(
            f"Unknown top-level keys {unknown_keys}. Allowed keys are {sorted(TOP_LEVEL_KEYS)}."
        )
    dataset = build_section(DatasetSpec, raw_config.get("dataset", {}), "dataset")
    if "matching" not in raw_config:
        raise InvalidConfigError("Section matching is required (delta_x and delta_y).")
    if "architecture" in raw_config:
        architecture = build_section(
            ArchitectureSpec, raw_config["architecture"], "architecture"
        )
    else:
        architecture = AIRFOIL_ARCHITECTURE if dataset.is_airfoil else TOY_ARCHITECTURE
    raw_methods = raw_config.get("methods", [{"name": "x2x"}])
    if not isinstance(raw_methods, list):
        raise InvalidConfigError("methods must be a list of method objects.")

    try:
        return ExperimentConfig(
            dataset=dataset,
            matching=build_section(MatchConfig, raw_config["matching"], "matching"),
            architecture=architecture,
            training=build_section(TrainConfig, raw_config.get("training", {}), "training"),
            optimization=build_section(
                OptimizeConfig, raw_config.get("optimization", {}), "optimization"
            ),
            evaluation=build_section(
                EvaluationSpec, raw_config.get("evaluation", {}), "evaluation"
            ),
            methods=tuple(
                build_section(MethodSpec, method, f"methods[{position}]")
                for position, method in enumerate(raw_methods)
            ),
            repetitions=raw_config.get("repetitions", 10),
            holdout_fraction=raw_config.get("holdout_fraction", 0.2),
            output_dir=output_dir_override(Path(raw_config.get("output_dir", "results"))),
            n_workers=raw_config.get("n_workers", 1),
            ablation=raw_config.get("ablation", {}),
        )
    except (TypeError, ValueError) as error:
        if isinstance(error, InvalidConfigError):
            raise
        raise InvalidConfigError(f"Invalid experiment config: {error}") from error


def resolve_config_path(path: Path) -> Path:
    """Config files can be named by path, or by file name inside scripts/experiment_configs."""
    if not path.exists() and (EXPERIMENT_CONFIGS_DIR / path).exists():
        return EXPERIMENT_CONFIGS_DIR / path
    return path


def load_experiment_config(path: Path) -> ExperimentConfig:
    path = resolve_config_path(path)
    config = parse_experiment_config(read_json_config(path))
    logger.info(f"Loaded experiment config {path}, results go to {config.output_dir}")
    return config


def apply_setting(config: ExperimentConfig, setting: Dict[str, Any]) -> ExperimentConfig:
    """Override the dataset and matching parameters named in one ablation setting."""
    dataset_overrides = {
        key: value for key, value in setting.items() if key in {"n_samples", "target_dim"}
    }
    matching_overrides = {
        key: value for key, value in setting.items() if key in {"delta_x", "delta_y"}
    }
    try:
        return dataclasses.replace(
            config,
            dataset=dataclasses.replace(config.dataset, **dataset_overrides),
            matching=dataclasses.replace(config.matching, **matching_overrides),
        )
    except ValueError as error:
        raise InvalidConfigError(f"Invalid ablation setting {setting}: {error}") from error


def setting_label(setting: Dict[str, Any]) -> str:
    if not setting:
        return "default"
    return "_".join(f"{key}={value}" for key, value in setting.items())


def prepare_data(
    config: ExperimentConfig, repetition: int
) -> Tuple[DesignSet, DesignSet, Callable[[Tensor], Tensor], KdeModel]:
    """
    Generate the designs of one repetition, split them and evaluate their properties.
    Toy properties are the log-density of a KDE fitted on the training split; airfoil
    properties come from the synthetic lift-to-drag oracle.
    Returns:
        the training set, the holdout set, the property oracle, and the likelihood model
            (KDE of the training designs)
    """
    dataset = config.dataset
    data_seed = dataset.rng_seed + repetition
    if dataset.is_airfoil:
        designs, _ = random_airfoils(dataset.n_samples, data_seed, dataset.n_points)
    else:
        points = generate_toy(
            ToyConfig(
                ToyFamily(dataset.family),
                dataset.n_samples,
                dataset.noise_scale,
                data_seed,
            )
        )
        embedding = (
            Embedding.random(dataset.target_dim, data_seed)
            if dataset.target_dim > 2
            else Embedding.identity()
        )
        designs = embed(points, embedding)
    train_set, holdout_set = designs.train_holdout_split(
        config.holdout_fraction, data_seed
    )

    likelihood = KdeModel(
        train_set.designs,
        config.evaluation.likelihood_bandwidth or dataset.kde_bandwidth,
    )
    oracle: Callable[[Tensor], Tensor]
    if dataset.is_airfoil:
        oracle = SyntheticAirfoilProperty(dataset.angle_of_attack)
    else:
        oracle = KdeModel(train_set.designs, dataset.kde_bandwidth)
    return (
        train_set.with_properties(oracle(train_set.designs)),
        holdout_set.with_properties(oracle(holdout_set.designs)),
        oracle,
        likelihood,
    )


def build_method(
    method: MethodSpec,
    config: ExperimentConfig,
    train_set: DesignSet,
    matched: MatchedDataset,
) -> DesignOptimizer:
    """Train (or tabulate) one method on the training split of a repetition."""
    if method.name == EXPLICIT_METHOD:
        model, _ = train_explicit(train_set, config.architecture, config.training)
        model.guidance_config = method.guidance_config()
        return model
    if method.name == TABULAR_METHOD:
        return TabularPropEn(matched, method.beta, config.optimization)
    propen_model = train_propen(
        matched, method.propen_variant(), config.architecture, config.training
    )
    propen_model.optimize_config = config.optimization
    return propen_model


def run_repetition(
    config: ExperimentConfig, setting: Dict[str, Any], repetition: int
) -> List[Dict[str, Any]]:
    """
    Run every method on one repetition and write its trajectory, per-step and result CSVs.
    Returns:
        one result row per method
    Raises:
        EmptyMatchedDatasetError: if the training split has no matched pair
    """
    config = apply_setting(config, setting)
    config = dataclasses.replace(
        config,
        training=dataclasses.replace(
            config.training, rng_seed=config.training.rng_seed + repetition
        ),
    )
    set_random_seed(config.training.rng_seed)
    logger.info(f"Starting repetition {repetition} ({setting_label(setting)})")
    repetition_dir = (
        config.output_dir / setting_label(setting) / f"repetition_{repetition:02d}"
    )
    repetition_dir.mkdir(parents=True, exist_ok=True)

    train_set, holdout_set, oracle, likelihood = prepare_data(config, repetition)
    matched = build_matched_dataset(train_set, config.matching)
    logger.info(f"Matched {len(matched)} pairs among {len(train_set)} training designs")
    if len(matched) == 0:
        raise EmptyMatchedDatasetError()

    rows = []
    for method in config.methods:
        optimizer = build_method(method, config, train_set, matched)
        trajectories = optimizer.optimize_seeds(
            holdout_set.designs, holdout_set.properties, oracle
        )
        trajectories_to_csv(
            trajectories, repetition_dir / f"trajectories_{method.name}.csv", method.name
        )
        report = evaluate_trajectories(
            trajectories,
            holdout_set.designs,
            holdout_set.require_properties(),
            train_set.designs,
            likelihood,
            config.evaluation.tolerance,
        )
        per_step_metrics(
            trajectories,
            holdout_set.designs,
            holdout_set.require_properties(),
            train_set.designs,
            likelihood,
            config.evaluation.tolerance,
        ).to_csv(repetition_dir / f"per_step_{method.name}.csv", index=False)
        logger.info(
            f"{method.name}: ratio of improvement {report.ratio_of_improvement:.2f} %"
        )
        rows.append(
            {
                "method": method.name,
                "family": config.dataset.family,
                "n_samples": config.dataset.n_samples,
                "target_dim": config.dataset.design_dimension,
                "delta_x": config.matching.delta_x,
                "delta_y": config.matching.delta_y,
                "repetition": repetition,
                "n_matched_pairs": len(matched),
                **report.to_dict(),
            }
        )

    pd.DataFrame(rows).to_csv(repetition_dir / "results.csv", index=False)
    return rows


def _run_job(job: Tuple[ExperimentConfig, Dict[str, Any], int]) -> List[Dict[str, Any]]:
    return run_repetition(*job)


def summarize(results: pd.DataFrame) -> pd.DataFrame:
    """
    Mean and standard deviation (population, ddof=0) of each metric over repetitions, one row
    per method and setting.
    """
    grouped = results.groupby(SUMMARY_KEYS, sort=False)
    metrics = grouped[METRIC_COLUMNS]
    summary = (
        metrics.mean()
        .add_suffix("_mean")
        .join(metrics.std(ddof=0).add_suffix("_std"))
        .join(grouped.size().rename("n_repetitions"))
    )
    ordered_columns = ["n_repetitions"] + [
        f"{metric}_{statistic}" for metric in METRIC_COLUMNS for statistic in ("mean", "std")
    ]
    return summary[ordered_columns].reset_index()


def run_experiment(config: ExperimentConfig) -> pd.DataFrame:
    """
    Run all repetitions of all ablation settings, then merge their results.
    Repetitions run in a process pool when config.n_workers > 1; each one writes its own files
    and results are merged in job order.
    Returns:
        the summary, also written to output_dir/summary.csv next to output_dir/results.csv
    Raises:
        EmptyMatchedDatasetError: if a repetition has no matched pair
        NonFiniteTrainingError: if a training diverges
    """
    jobs = [
        (config, setting, repetition)
        for setting in (unroll_grid(config.ablation) if config.ablation else [{}])
        for repetition in range(config.repetitions)
    ]
    if config.n_workers > 1:
        with ProcessPoolExecutor(
            max_workers=config.n_workers, mp_context=multiprocessing.get_context("spawn")
        ) as executor:
            job_rows = list(executor.map(_run_job, jobs))
    else:
        job_rows = [_run_job(job) for job in jobs]

    results = pd.DataFrame([row for rows in job_rows for row in rows])
    summary = summarize(results)
    config.output_dir.mkdir(parents=True, exist_ok=True)
    results.to_csv(config.output_dir / "results.csv", index=False)
    summary.to_csv(config.output_dir / "summary.csv", index=False)
    logger.info(
        f"Saved results in {config.output_dir / 'results.csv'} "
        f"and summary in {config.output_dir / 'summary.csv'}"
    )
    return summary
