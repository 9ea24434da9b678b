import math
from dataclasses import dataclass
from enum import Enum

import torch
from torch import Tensor

from propen.modules.dense_mlp import DTYPE

from .design_set import DesignSet

PINWHEEL_ARMS = 5
PINWHEEL_RATE = 0.25
EIGHT_GAUSSIANS_MODES = 8
EIGHT_GAUSSIANS_RADIUS = 2.0


class ToyFamily(str, Enum):
    PINWHEEL = "pinwheel"
    EIGHT_GAUSSIANS = "8gaussians"


@dataclass(frozen=True)
class ToyConfig:
    """
    Parameters of a 2-dim toy distribution.
    For 8-Gaussians, noise_scale is the standard deviation of each mode.
    For the pinwheel, the radial and tangential standard deviations are 3 * noise_scale
    and noise_scale / 2 (0.3 and 0.05 with the default value).
    """

    family: ToyFamily = ToyFamily.EIGHT_GAUSSIANS
    n_samples: int = 200
    noise_scale: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "family", ToyFamily(self.family))
        if self.n_samples < 1:
            raise ValueError(f"n_samples must be at least 1, got {self.n_samples}.")
        if not self.noise_scale > 0:
            raise ValueError(f"noise_scale must be positive, got {self.noise_scale}.")
        if self.rng_seed < 0:
            raise ValueError(f"rng_seed must be unsigned, got {self.rng_seed}.")


def eight_gaussians_centers() -> Tensor:
    angles = torch.arange(EIGHT_GAUSSIANS_MODES, dtype=DTYPE) * (
        2 * math.pi / EIGHT_GAUSSIANS_MODES
    )
    return EIGHT_GAUSSIANS_RADIUS * torch.stack([angles.cos(), angles.sin()], dim=1)


def generate_toy(config: ToyConfig) -> DesignSet:
    """
    Sample a 2-dim toy dataset. Properties are left unset.
    Args:
        config: family, size, noise and seed of the dataset
    Returns:
        a DesignSet of config.n_samples 2-dim designs, identical for identical configs
    """
    generator = torch.Generator().manual_seed(config.rng_seed)
    if config.family == ToyFamily.EIGHT_GAUSSIANS:
        points = _sample_eight_gaussians(config, generator)
    else:
        points = _sample_pinwheel(config, generator)
    return DesignSet(points)


def _sample_eight_gaussians(config: ToyConfig, generator: torch.Generator) -> Tensor:
    modes = torch.randint(
        EIGHT_GAUSSIANS_MODES, (config.n_samples,), generator=generator
    )
    noise = torch.randn(config.n_samples, 2, generator=generator, dtype=DTYPE)
    return eight_gaussians_centers()[modes] + config.noise_scale * noise


def _sample_pinwheel(config: ToyConfig, generator: torch.Generator) -> Tensor:
    arm_angles = torch.arange(PINWHEEL_ARMS, dtype=DTYPE) * (2 * math.pi / PINWHEEL_ARMS)
    arms = torch.arange(config.n_samples) % PINWHEEL_ARMS
    features = torch.randn(config.n_samples, 2, generator=generator, dtype=DTYPE)
    features = features * torch.tensor(
        [3 * config.noise_scale, config.noise_scale / 2], dtype=DTYPE
    )
    features[:, 0] += 1.0
    # Each arm is bent by an angle growing with the distance to the center
    angles = arm_angles[arms] + PINWHEEL_RATE * features[:, 0].exp()
    rotations = torch.stack(
        [
            torch.stack([angles.cos(), -angles.sin()], dim=1),
            torch.stack([angles.sin(), angles.cos()], dim=1),
        ],
        dim=1,
    )
    points = torch.einsum("ti,tij->tj", features, rotations)
    return points[torch.randperm(config.n_samples, generator=generator)]


class Embedding:
    """
    Linear isometric embedding of R^2 into R^d, given by a d x 2 matrix with orthonormal columns.
    """

    def __init__(self, matrix: Tensor):
        matrix = torch.as_tensor(matrix, dtype=DTYPE)
        if matrix.ndim != 2 or matrix.shape[1] != 2 or matrix.shape[0] < 2:
            raise ValueError(
                f"An embedding matrix must have shape (d, 2) with d >= 2, got {tuple(matrix.shape)}."
            )
        gram = matrix.T @ matrix
        if not torch.allclose(gram, torch.eye(2, dtype=DTYPE), rtol=0, atol=1e-10):
            raise ValueError("The columns of an embedding matrix must be orthonormal.")
        self.matrix = matrix

    @classmethod
    def random(cls, target_dim: int, seed: int) -> "Embedding":
        """Draw a random embedding from the QR decomposition of a gaussian matrix."""
        if target_dim < 2:
            raise ValueError(f"target_dim must be at least 2, got {target_dim}.")
        generator = torch.Generator().manual_seed(seed)
        gaussian = torch.randn(target_dim, 2, generator=generator, dtype=DTYPE)
        q_matrix, r_matrix = torch.linalg.qr(gaussian)
        signs = torch.sign(torch.diagonal(r_matrix))
        signs[signs == 0] = 1.0
        return cls(q_matrix * signs)

    @classmethod
    def identity(cls) -> "Embedding":
        return cls(torch.eye(2, dtype=DTYPE))

    @property
    def target_dim(self) -> int:
        return self.matrix.shape[0]


def embed(points: DesignSet, embedding: Embedding) -> DesignSet:
    """
    Map 2-dim designs to R^d with an isometric embedding. Properties are carried over.
    Raises:
        ValueError: if the designs are not 2-dim
    """
    if points.dimension != 2:
        raise ValueError(f"Only 2-dim designs can be embedded, got dimension {points.dimension}.")
    return DesignSet(points.designs @ embedding.matrix.T, points.properties)
