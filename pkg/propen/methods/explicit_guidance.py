from dataclasses import dataclass
from typing import List, Optional, Tuple

import torch
from loguru import logger
from torch import Tensor, nn
from tqdm import tqdm

from propen.datasets import DesignSet
from propen.exceptions import NonFiniteStateError, NonFiniteTrainingError
from propen.modules import (
    ArchitectureSpec,
    Mlp,
    TrainConfig,
    decoder,
    encoder,
    forward,
    latent_discriminator,
    shuffled_batches,
)
from propen.modules.dense_mlp import DTYPE
from propen.utils import sliding_average

from .design_optimizer import DesignOptimizer
from .trajectory import PropertyOracle, Trajectory
from .utils import Standardizer


@dataclass(frozen=True)
class GuidanceConfig:
    """
    Gradient ascent in standardized latent coordinates u = (z - mean) / scale:
        u_{t+1} = u_t + step_size * clip(grad_u d(u_t)), n_steps times,
    where clip rescales gradients longer than max_gradient_norm to that norm. With
    max_gradient_norm None, gradients are used as they are.
    """

    step_size: float = 0.01
    n_steps: int = 30
    max_gradient_norm: Optional[float] = 1.0

    def __post_init__(self):
        if not self.step_size >= 0:
            raise ValueError(f"step_size must be nonnegative, got {self.step_size}.")
        if self.n_steps < 0:
            raise ValueError(f"n_steps must be nonnegative, got {self.n_steps}.")
        if self.max_gradient_norm is not None and not self.max_gradient_norm > 0:
            raise ValueError(
                f"max_gradient_norm must be positive, got {self.max_gradient_norm}."
            )


class ExplicitGuidanceModel(DesignOptimizer):
    """
    Auto-encoder with a property discriminator on its latent codes. Designs are optimized by
    gradient ascent of the discriminator in latent space, then decoded.
    """

    method_name = "explicit"

    def __init__(
        self,
        encoder_model: Mlp,
        decoder_model: Mlp,
        discriminator: Mlp,
        standardizer: Optional[Standardizer] = None,
        guidance_config: GuidanceConfig = GuidanceConfig(),
        latent_standardizer: Optional[Standardizer] = None,
    ):
        """
        Args:
            encoder_model: maps standardized designs to latent codes
            decoder_model: maps latent codes back to standardized designs
            discriminator: predicts the (standardized) property from a latent code
            standardizer: standardization of the designs. Defaults to the identity.
            guidance_config: guidance used by optimize_seed
            latent_standardizer: coordinates in which guidance steps are taken, usually fitted
                on the latent codes of the training designs. Defaults to the identity.
        """
        super().__init__()
        latent_dim = encoder_model.output_dim
        if decoder_model.input_dim != latent_dim or discriminator.input_dim != latent_dim:
            raise ValueError(
                f"Encoder outputs {latent_dim} values but decoder expects {decoder_model.input_dim} "
                f"and discriminator expects {discriminator.input_dim}."
            )
        if discriminator.output_dim != 1:
            raise ValueError(
                f"The discriminator must output a single value, got {discriminator.output_dim}."
            )
        if decoder_model.output_dim != encoder_model.input_dim:
            raise ValueError(
                f"Decoder outputs {decoder_model.output_dim} values for designs of length {encoder_model.input_dim}."
            )
        self.encoder = encoder_model
        self.decoder = decoder_model
        self.discriminator = discriminator
        self.standardizer = (
            standardizer
            if standardizer is not None
            else Standardizer.identity(encoder_model.input_dim)
        )
        self.guidance_config = guidance_config
        self.latent_standardizer = (
            latent_standardizer
            if latent_standardizer is not None
            else Standardizer.identity(latent_dim)
        )

    @property
    def design_dimension(self) -> int:
        return self.encoder.input_dim

    def encode(self, designs: Tensor) -> Tensor:
        return forward(self.encoder, self.standardizer.transform(designs))

    def decode(self, latents: Tensor) -> Tensor:
        return self.standardizer.inverse_transform(forward(self.decoder, latents))

    def guide_latents(self, seed: Tensor, config: GuidanceConfig) -> Tensor:
        """
        Latent codes z_0 = encode(seed), ..., z_{n_steps}.
        Returns:
            shape (n_steps + 1, latent_dim)
        Raises:
            NonFiniteStateError: if a latent code becomes non-finite
        """
        latent_scale = self.latent_standardizer.scale
        latents = [self.encode(seed)]
        for step in range(1, config.n_steps + 1):
            # chain rule: grad_u d = scale * grad_z d
            gradient = latent_scale * self.discriminator.input_gradient(latents[-1])
            if config.max_gradient_norm is not None:
                gradient = gradient * (
                    config.max_gradient_norm / gradient.norm().clamp(min=config.max_gradient_norm)
                )
            next_latent = latents[-1] + latent_scale * config.step_size * gradient
            if not torch.isfinite(next_latent).all():
                raise NonFiniteStateError(
                    step,
                    Trajectory(self.decode(torch.stack(latents)), steps_taken=step - 1),
                )
            latents.append(next_latent)
        return torch.stack(latents)

    def guide(
        self,
        seed: Tensor,
        config: GuidanceConfig,
        oracle: Optional[PropertyOracle] = None,
    ) -> Trajectory:
        """
        Optimize a seed by discriminator ascent in latent space.
        Args:
            seed: shape (design_dimension,)
            config: step size and number of steps
            oracle: if given, evaluates the property of every decoded design
        Returns:
            the decoded designs of every latent code. The first state is the reconstruction
                decode(encode(seed)), not the seed itself.
        Raises:
            NonFiniteStateError: if a latent code or a decoded design becomes non-finite
        """
        seed = torch.as_tensor(seed, dtype=DTYPE)
        if seed.shape != (self.design_dimension,):
            raise ValueError(
                f"Expected a seed of length {self.design_dimension}, got shape {tuple(seed.shape)}."
            )
        states = self.decode(self.guide_latents(seed, config))
        finite_states = torch.isfinite(states).all(dim=1)
        if not finite_states.all():
            step = int((~finite_states).nonzero()[0])
            raise NonFiniteStateError(
                step, Trajectory(states[:step], steps_taken=max(step - 1, 0))
            )
        trajectory = Trajectory(states, converged=False, steps_taken=config.n_steps)
        if oracle is not None:
            trajectory.evaluate(oracle)
        return trajectory

    def optimize_seed(
        self,
        seed: Tensor,
        seed_property: Optional[float] = None,
        oracle: Optional[PropertyOracle] = None,
    ) -> Trajectory:
        return self.guide(seed, self.guidance_config, oracle)


def train_explicit(
    data: DesignSet,
    arch: ArchitectureSpec,
    config: TrainConfig,
    use_tqdm: bool = False,
) -> Tuple[ExplicitGuidanceModel, List[float]]:
    """
    Jointly train an auto-encoder and a latent property discriminator on
        MSE(decode(encode(x)), x) + MSE(d(encode(x)), y)
    with standardized designs and properties. config.mix_beta is not used.
    Args:
        data: designs with property values
        arch: shape of the encoder, decoder and discriminator
        config: training hyperparameters
        use_tqdm: whether to display a progress bar over epochs
    Returns:
        the trained model, and the mean loss of each epoch
    Raises:
        ValueError: if data is empty or has no property values
        NonFiniteTrainingError: if the training loss becomes NaN or infinite
    """
    if len(data) == 0:
        raise ValueError("Cannot train the explicit guidance model on an empty DesignSet.")
    properties = data.require_properties()[:, None]
    design_standardizer = Standardizer.fit(data.designs)
    property_standardizer = Standardizer.fit(properties)
    designs = design_standardizer.transform(data.designs)
    scaled_properties = property_standardizer.transform(properties)

    model = ExplicitGuidanceModel(
        encoder(data.dimension, arch, seed=config.rng_seed),
        decoder(data.dimension, arch, seed=config.rng_seed + 1),
        latent_discriminator(arch, seed=config.rng_seed + 2),
        design_standardizer,
    )
    data_loader = shuffled_batches(
        (designs, scaled_properties), config.batch_size, config.rng_seed
    )
    optimizer = torch.optim.Adam(
        model.parameters(), lr=config.learning_rate, betas=(0.9, 0.999), eps=1e-8
    )

    logger.info(f"Training explicit guidance model on {len(data)} designs")
    epoch_losses: List[float] = []
    model.train()
    with torch.enable_grad(), tqdm(
        range(config.epochs), desc="Training explicit", disable=not use_tqdm
    ) as tqdm_train:
        for epoch in tqdm_train:
            summed_loss = 0.0
            for batch, (batch_designs, batch_properties) in enumerate(data_loader):
                latents = model.encoder(batch_designs)
                loss = nn.functional.mse_loss(
                    model.decoder(latents), batch_designs
                ) + nn.functional.mse_loss(model.discriminator(latents), batch_properties)
                if not torch.isfinite(loss):
                    raise NonFiniteTrainingError(epoch, batch, loss.item())
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                summed_loss += loss.item() * len(batch_designs)

            epoch_losses.append(summed_loss / len(data))
            tqdm_train.set_postfix(loss=sliding_average(epoch_losses, 10))

    model.eval()
    model.latent_standardizer = Standardizer.fit(forward(model.encoder, designs))
    logger.debug(f"Explicit guidance model final loss {epoch_losses[-1]:.3e}")
    return model, epoch_losses
