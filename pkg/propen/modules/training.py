from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import torch
from loguru import logger
from torch import Tensor, nn
from torch.utils.data import BatchSampler, DataLoader, RandomSampler, TensorDataset
from tqdm import tqdm

from propen.exceptions import NonFiniteTrainingError
from propen.modules.dense_mlp import DTYPE, Mlp
from propen.utils import sliding_average


@dataclass(frozen=True)
class TrainConfig:
    """
    Hyperparameters of the stochastic-gradient training loop.
    mix_beta is the weight of the reconstruction regularizer (0 disables it).
    """

    epochs: int = 500
    batch_size: int = 64
    learning_rate: float = 1e-3
    rng_seed: int = 0
    mix_beta: float = 0.0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError(f"epochs must be positive, got {self.epochs}.")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be at least 1, got {self.batch_size}.")
        if not self.learning_rate > 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}.")
        if self.rng_seed < 0:
            raise ValueError(f"rng_seed must be unsigned, got {self.rng_seed}.")
        if not self.mix_beta >= 0:
            raise ValueError(f"mix_beta must be nonnegative, got {self.mix_beta}.")


def matched_reconstruction_loss(
    outputs: Tensor,
    targets: Tensor,
    mix_targets: Optional[Tensor] = None,
    mix_beta: float = 0.0,
) -> Tensor:
    """
    MSE(outputs, targets) + mix_beta * MSE(outputs, mix_targets).
    The mix term is skipped when mix_beta is 0.
    """
    loss = nn.functional.mse_loss(outputs, targets)
    if mix_beta > 0:
        if mix_targets is None:
            raise ValueError("mix_beta > 0 requires mix targets.")
        loss = loss + mix_beta * nn.functional.mse_loss(outputs, mix_targets)
    return loss


def loss_and_gradients(
    model: Mlp,
    inputs: Tensor,
    targets: Tensor,
    mix_targets: Optional[Tensor] = None,
    mix_beta: float = 0.0,
) -> Tuple[float, Dict[str, Tensor]]:
    """
    Compute the regularized matched reconstruction loss of the model and its exact gradient
    with respect to every parameter, by backpropagation.
    Args:
        model: the network
        inputs: shape (input_dim,) or (batch_size, input_dim)
        targets: matched partners, same leading shape as inputs and output_dim columns
        mix_targets: reconstruction targets of the mix regularizer (usually the inputs)
        mix_beta: weight of the mix regularizer
    Returns:
        the loss value, and a dict mapping each parameter name to its gradient
    Raises:
        ValueError: if dimensions are inconsistent, or if mix_beta > 0 without mix_targets
    """
    inputs = torch.as_tensor(inputs, dtype=DTYPE)
    targets = torch.as_tensor(targets, dtype=DTYPE)
    _raise_error_if_wrong_target_dim(model, targets, "target")
    _raise_error_if_wrong_batch_shape(inputs, targets, "target")
    if mix_beta > 0:
        if mix_targets is None:
            raise ValueError("mix_beta > 0 requires a mix target.")
        mix_targets = torch.as_tensor(mix_targets, dtype=DTYPE)
        _raise_error_if_wrong_target_dim(model, mix_targets, "mix target")
        _raise_error_if_wrong_batch_shape(inputs, mix_targets, "mix target")

    model.zero_grad()
    with torch.enable_grad():
        loss = matched_reconstruction_loss(model(inputs), targets, mix_targets, mix_beta)
        loss.backward()
    gradients = {
        name: parameter.grad.detach().clone()
        for name, parameter in model.named_parameters()
    }
    model.zero_grad()
    return loss.item(), gradients


def shuffled_batches(tensors: Tuple[Tensor, ...], batch_size: int, rng_seed: int) -> DataLoader:
    """
    DataLoader over aligned tensors, reshuffled at every epoch by a generator seeded with
    rng_seed. Each batch is gathered with a single indexing of every tensor.
    """
    dataset = TensorDataset(*tensors)
    sampler = BatchSampler(
        RandomSampler(dataset, generator=torch.Generator().manual_seed(rng_seed)),
        batch_size=batch_size,
        drop_last=False,
    )
    return DataLoader(dataset, sampler=sampler, batch_size=None)


def train(
    model: Mlp,
    inputs: Tensor,
    targets: Tensor,
    config: TrainConfig,
    mix_targets: Optional[Tensor] = None,
    use_tqdm: bool = False,
) -> Tuple[Mlp, List[float]]:
    """
    Train the model in place with Adam on (input, target, mix target) triplets.
    Batches are reshuffled at every epoch by a generator seeded with config.rng_seed; the last
    batch of an epoch may be shorter.
    Args:
        model: the network to train
        inputs: shape (n_pairs, input_dim)
        targets: shape (n_pairs, output_dim)
        config: training hyperparameters
        mix_targets: shape (n_pairs, output_dim). Required if config.mix_beta > 0.
        use_tqdm: whether to display a progress bar over epochs
    Returns:
        the trained model, and the mean loss of each epoch
    Raises:
        ValueError: if the training set is empty or dimensions are inconsistent
        NonFiniteTrainingError: if the loss becomes NaN or infinite
    """
    inputs = torch.as_tensor(inputs, dtype=DTYPE)
    targets = torch.as_tensor(targets, dtype=DTYPE)
    if len(inputs) == 0:
        raise ValueError("Cannot train on an empty training set.")
    if len(inputs) != len(targets):
        raise ValueError(
            f"Got {len(inputs)} inputs but {len(targets)} targets."
        )
    _raise_error_if_wrong_target_dim(model, targets, "target")
    if config.mix_beta > 0:
        if mix_targets is None:
            raise ValueError("mix_beta > 0 requires mix targets.")
        mix_targets = torch.as_tensor(mix_targets, dtype=DTYPE)
        _raise_error_if_wrong_target_dim(model, mix_targets, "mix target")
    else:
        mix_targets = targets

    data_loader = shuffled_batches(
        (inputs, targets, mix_targets), config.batch_size, config.rng_seed
    )
    optimizer = torch.optim.Adam(
        model.parameters(), lr=config.learning_rate, betas=(0.9, 0.999), eps=1e-8
    )

    epoch_losses: List[float] = []
    model.train()
    with torch.enable_grad(), tqdm(
        range(config.epochs), desc="Training", disable=not use_tqdm
    ) as tqdm_train:
        for epoch in tqdm_train:
            summed_loss = 0.0
            for batch, (batch_inputs, batch_targets, batch_mix_targets) in enumerate(
                data_loader
            ):
                loss = matched_reconstruction_loss(
                    model(batch_inputs),
                    batch_targets,
                    batch_mix_targets,
                    config.mix_beta,
                )
                if not torch.isfinite(loss):
                    raise NonFiniteTrainingError(epoch, batch, loss.item())
                optimizer.zero_grad()
                loss.backward()
                optimizer.step()
                summed_loss += loss.item() * len(batch_inputs)

            epoch_losses.append(summed_loss / len(inputs))
            tqdm_train.set_postfix(loss=sliding_average(epoch_losses, 10))

    model.eval()
    logger.debug(
        f"Trained {model.dims()} network for {config.epochs} epochs, final loss {epoch_losses[-1]:.3e}"
    )
    return model, epoch_losses


def _raise_error_if_wrong_target_dim(model: Mlp, targets: Tensor, name: str):
    if targets.shape[-1] != model.output_dim:
        raise ValueError(
            f"Expected {name} of length {model.output_dim}, got a tensor of shape {tuple(targets.shape)}."
        )


def _raise_error_if_wrong_batch_shape(inputs: Tensor, targets: Tensor, name: str):
    if inputs.shape[:-1] != targets.shape[:-1]:
        raise ValueError(
            f"Inputs of shape {tuple(inputs.shape)} and {name}s of shape {tuple(targets.shape)} "
            "must have the same leading dimensions."
        )
