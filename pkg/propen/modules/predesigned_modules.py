from dataclasses import dataclass
from typing import List

from .dense_mlp import Activation, Mlp

__all__ = [
    "ArchitectureSpec",
    "TOY_ARCHITECTURE",
    "AIRFOIL_ARCHITECTURE",
    "encoder_decoder",
    "encoder",
    "decoder",
    "latent_discriminator",
]


@dataclass(frozen=True)
class ArchitectureSpec:
    """
    Shape of the dense networks: n_hidden_layers ReLU layers of hidden_width units on each
    side of a latent_dim bottleneck.
    """

    hidden_width: int = 30
    n_hidden_layers: int = 2
    latent_dim: int = 15

    def __post_init__(self):
        for name in ("hidden_width", "n_hidden_layers", "latent_dim"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}.")


TOY_ARCHITECTURE = ArchitectureSpec(hidden_width=30, n_hidden_layers=2, latent_dim=15)
AIRFOIL_ARCHITECTURE = ArchitectureSpec(
    hidden_width=100, n_hidden_layers=3, latent_dim=50
)


def _encoder_dims(input_dim: int, arch: ArchitectureSpec) -> List[int]:
    return [input_dim] + [arch.hidden_width] * arch.n_hidden_layers + [arch.latent_dim]


def _encoder_activations(arch: ArchitectureSpec) -> List[Activation]:
    # The bottleneck stays linear so that no latent direction is clipped.
    return [Activation.RELU] * arch.n_hidden_layers + [Activation.IDENTITY]


def encoder_decoder(
    input_dim: int, output_dim: int, arch: ArchitectureSpec, seed: int = 0
) -> Mlp:
    """
    Single encoder-decoder network f: input -> latent bottleneck -> output.
    This is the network trained by PropEn on matched pairs.
    """
    dims = (
        _encoder_dims(input_dim, arch)
        + [arch.hidden_width] * arch.n_hidden_layers
        + [output_dim]
    )
    activations = (
        _encoder_activations(arch)
        + [Activation.RELU] * arch.n_hidden_layers
        + [Activation.IDENTITY]
    )
    return Mlp.from_dims(dims, activations, seed=seed)


def encoder(input_dim: int, arch: ArchitectureSpec, seed: int = 0) -> Mlp:
    return Mlp.from_dims(
        _encoder_dims(input_dim, arch), _encoder_activations(arch), seed=seed
    )


def decoder(output_dim: int, arch: ArchitectureSpec, seed: int = 0) -> Mlp:
    dims = [arch.latent_dim] + [arch.hidden_width] * arch.n_hidden_layers + [output_dim]
    return Mlp.from_dims(dims, seed=seed)


def latent_discriminator(arch: ArchitectureSpec, seed: int = 0) -> Mlp:
    """Property predictor on latent codes, with the same hidden layers as the encoder."""
    dims = [arch.latent_dim] + [arch.hidden_width] * arch.n_hidden_layers + [1]
    return Mlp.from_dims(dims, seed=seed)
