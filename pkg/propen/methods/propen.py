import dataclasses
import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Optional, Union

import torch
from loguru import logger
from torch import Tensor

from propen.exceptions import EmptyMatchedDatasetError
from propen.matching import MatchedDataset
from propen.modules import (
    ArchitectureSpec,
    Mlp,
    TrainConfig,
    encoder_decoder,
    forward,
    load_mlp,
    save_mlp,
    train,
)
from propen.modules.dense_mlp import DTYPE
from propen.utils import squared_distances

from .design_optimizer import DesignOptimizer
from .trajectory import OptimizeConfig, PropertyOracle, Trajectory, iterate_design
from .utils import Standardizer


class IoMode(str, Enum):
    X2X = "x2x"
    XY2XY = "xy2xy"


@dataclass(frozen=True)
class PropEnVariant:
    """
    X2X models map designs to designs. XY2XY models map (design, property) to
    (design, property), so their input and output have one more coordinate.
    mix_beta > 0 adds the reconstruction regularizer mix_beta * MSE(f(x), x).
    """

    io_mode: IoMode = IoMode.X2X
    mix_beta: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "io_mode", IoMode(self.io_mode))
        if not self.mix_beta >= 0:
            raise ValueError(f"mix_beta must be nonnegative, got {self.mix_beta}.")

    @property
    def name(self) -> str:
        """x2x, xy2xy, mix_x2x or mix_xy2xy"""
        prefix = "mix_" if self.mix_beta > 0 else ""
        return f"{prefix}{self.io_mode.value}"

    def state_dimension(self, design_dimension: int) -> int:
        return design_dimension + (1 if self.io_mode == IoMode.XY2XY else 0)


class PropEn(DesignOptimizer):
    """
    Encoder-decoder trained on matched pairs, used as an implicit optimizer: designs are
    improved by re-feeding them to the network until they stop moving.
    The network works on standardized states; the standardization is inverted on its output so
    that trajectories and the stopping rule live in the original design space.
    """

    def __init__(
        self,
        model: Mlp,
        variant: PropEnVariant,
        standardizer: Standardizer,
        optimize_config: OptimizeConfig = OptimizeConfig(),
    ):
        super().__init__()
        if model.input_dim != standardizer.dimension or model.output_dim != standardizer.dimension:
            raise ValueError(
                f"Model maps {model.input_dim} to {model.output_dim} values "
                f"but states have {standardizer.dimension} coordinates."
            )
        self.model = model
        self.variant = variant
        self.standardizer = standardizer
        self.optimize_config = optimize_config

    @property
    def method_name(self) -> str:  # type: ignore[override]
        return self.variant.name

    @property
    def design_dimension(self) -> int:
        if self.variant.io_mode == IoMode.XY2XY:
            return self.standardizer.dimension - 1
        return self.standardizer.dimension

    def step(self, state: Tensor) -> Tensor:
        """One application of the trained map, in the original state space."""
        return self.standardizer.inverse_transform(
            forward(self.model, self.standardizer.transform(state))
        )

    def optimize(
        self,
        seed: Tensor,
        config: OptimizeConfig,
        oracle: Optional[PropertyOracle] = None,
        seed_property: Optional[float] = None,
    ) -> Trajectory:
        """
        Iterate x_t = f(x_{t-1}) from the seed.
        For XY2XY, the seed's property initializes the property coordinate; afterwards the
        model's own predicted property is re-fed.
        Args:
            seed: shape (design_dimension,)
            config: stopping rule
            oracle: evaluates the property of designs. For XY2XY, it also provides the seed's
                property if seed_property is not given.
            seed_property: property value of the seed (XY2XY only)
        Returns:
            the trajectory of designs
        Raises:
            NonFiniteStateError: if the network produces a non-finite state
        """
        seed = torch.as_tensor(seed, dtype=DTYPE)
        if seed.shape != (self.design_dimension,):
            raise ValueError(
                f"Expected a seed of length {self.design_dimension}, got shape {tuple(seed.shape)}."
            )
        initial_state = seed
        if self.variant.io_mode == IoMode.XY2XY:
            if seed_property is None:
                if oracle is None:
                    raise ValueError(
                        "XY2XY optimization needs the seed's property value or an oracle."
                    )
                seed_property = float(oracle(seed))
            initial_state = torch.cat([seed, torch.tensor([seed_property], dtype=DTYPE)])
        return iterate_design(
            self.step, initial_state, config, self.design_dimension, oracle
        )

    def optimize_seed(
        self,
        seed: Tensor,
        seed_property: Optional[float] = None,
        oracle: Optional[PropertyOracle] = None,
    ) -> Trajectory:
        return self.optimize(seed, self.optimize_config, oracle, seed_property)

    def save(self, path: Union[Path, str]) -> None:
        """
        Write the network as a PRPN file at path, and the variant and standardization
        next to it in a JSON file with the same stem.
        """
        path = Path(path)
        save_mlp(self.model, path)
        sidecar = {
            "io_mode": self.variant.io_mode.value,
            "mix_beta": self.variant.mix_beta,
            "standardizer": self.standardizer.to_dict(),
        }
        path.with_suffix(".json").write_text(json.dumps(sidecar, indent=2))

    @classmethod
    def load(
        cls,
        path: Union[Path, str],
        optimize_config: OptimizeConfig = OptimizeConfig(),
    ) -> "PropEn":
        path = Path(path)
        sidecar = json.loads(path.with_suffix(".json").read_text())
        return cls(
            load_mlp(path),
            PropEnVariant(IoMode(sidecar["io_mode"]), sidecar["mix_beta"]),
            Standardizer.from_dict(sidecar["standardizer"]),
            optimize_config,
        )


def matched_states(matched: MatchedDataset, variant: PropEnVariant):
    """
    Source and target states of all pairs. XY2XY states append the property value to the design.
    Returns:
        sources and targets, both of shape (n_pairs, state_dimension)
    """
    sources, targets = matched.sources(), matched.targets()
    if variant.io_mode == IoMode.XY2XY:
        sources = torch.cat([sources, matched.source_properties()[:, None]], dim=1)
        targets = torch.cat([targets, matched.target_properties()[:, None]], dim=1)
    return sources, targets


def train_propen(
    matched: MatchedDataset,
    variant: PropEnVariant,
    arch: ArchitectureSpec,
    config: TrainConfig,
    use_tqdm: bool = False,
) -> PropEn:
    """
    Train an encoder-decoder to map each matched source to its target, with the mix
    regularizer of the variant pulling outputs back to the source.
    Standardization statistics are computed on all designs of the matched dataset's DesignSet
    (and their properties for XY2XY). Initialization and shuffling are seeded by
    config.rng_seed.
    Args:
        matched: the matched dataset
        variant: input/output mode and mix weight. Its mix_beta overrides config.mix_beta.
        arch: shape of the encoder-decoder
        config: training hyperparameters
        use_tqdm: whether to display a progress bar over epochs
    Returns:
        the trained PropEn optimizer
    Raises:
        EmptyMatchedDatasetError: if there is no pair to train on
        NonFiniteTrainingError: if the training loss becomes NaN or infinite
    """
    if len(matched) == 0:
        raise EmptyMatchedDatasetError()
    design_set = matched.design_set
    all_states = design_set.designs
    if variant.io_mode == IoMode.XY2XY:
        all_states = torch.cat(
            [all_states, design_set.require_properties()[:, None]], dim=1
        )
    standardizer = Standardizer.fit(all_states)
    sources, targets = matched_states(matched, variant)

    state_dimension = variant.state_dimension(design_set.dimension)
    model = encoder_decoder(state_dimension, state_dimension, arch, seed=config.rng_seed)
    logger.info(
        f"Training PropEn {variant.name} on {len(matched)} matched pairs of {len(design_set)} designs"
    )
    train(
        model,
        standardizer.transform(sources),
        standardizer.transform(targets),
        dataclasses.replace(config, mix_beta=variant.mix_beta),
        mix_targets=standardizer.transform(sources),
        use_tqdm=use_tqdm,
    )
    return PropEn(model, variant, standardizer)


class TabularPropEn(DesignOptimizer):
    """
    Nonparametric stand-in for a trained PropEn X2X model: a design moves to the closed-form
    optimum of its nearest dataset design, (mean of that design's matches + beta * x) / (1 + beta).
    Designs whose nearest dataset design has no match are fixed points.
    """

    method_name = "tabular"

    def __init__(
        self,
        matched: MatchedDataset,
        beta: float = 0.0,
        optimize_config: OptimizeConfig = OptimizeConfig(),
    ):
        super().__init__()
        if len(matched.design_set) == 0:
            raise ValueError("Tabular optimization needs a non-empty DesignSet.")
        if not beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {beta}.")
        designs = matched.design_set.designs
        match_counts = torch.bincount(matched.pairs[:, 0], minlength=len(designs))
        match_sums = torch.zeros_like(designs).index_add_(
            0, matched.pairs[:, 0], matched.targets()
        )
        self.designs = designs
        self.is_matched = match_counts > 0
        self.match_means = match_sums / match_counts.clamp(min=1)[:, None]
        self.beta = beta
        self.optimize_config = optimize_config

    @property
    def design_dimension(self) -> int:
        return self.designs.shape[1]

    def step(self, state: Tensor) -> Tensor:
        nearest = int(squared_distances(state[None, :], self.designs)[0].argmin())
        if not self.is_matched[nearest]:
            return state
        return (self.match_means[nearest] + self.beta * state) / (1 + self.beta)

    def optimize_seed(
        self,
        seed: Tensor,
        seed_property: Optional[float] = None,
        oracle: Optional[PropertyOracle] = None,
    ) -> Trajectory:
        return iterate_design(
            self.step,
            torch.as_tensor(seed, dtype=DTYPE),
            self.optimize_config,
            oracle=oracle,
        )
