import math
from enum import Enum
from typing import List, Optional, Sequence

import torch
from torch import Tensor, nn

DTYPE = torch.float64


class Activation(str, Enum):
    RELU = "relu"
    IDENTITY = "identity"


class DenseLayer(nn.Module):
    """
    Affine map followed by an element-wise activation.
    Weights have shape (out_dim, in_dim), biases have shape (out_dim,).
    """

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        activation: Activation = Activation.RELU,
        generator: Optional[torch.Generator] = None,
    ):
        """
        Args:
            in_dim: size of the input vectors
            out_dim: size of the output vectors
            activation: activation applied after the affine map
            generator: random generator used for Glorot-uniform weight initialization.
                Biases are initialized to zero.
        """
        super().__init__()
        if in_dim < 1 or out_dim < 1:
            raise ValueError(
                f"Layer dimensions must be positive, got in_dim={in_dim} and out_dim={out_dim}."
            )
        bound = math.sqrt(6.0 / (in_dim + out_dim))
        initial_weights = (
            torch.rand(out_dim, in_dim, generator=generator, dtype=DTYPE) * 2 - 1
        ) * bound
        self.weights = nn.Parameter(initial_weights)
        self.biases = nn.Parameter(torch.zeros(out_dim, dtype=DTYPE))
        self.activation = Activation(activation)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[0]

    def forward(self, inputs: Tensor) -> Tensor:
        pre_activation = inputs @ self.weights.T + self.biases
        if self.activation == Activation.RELU:
            return pre_activation.relu()
        return pre_activation


class Mlp(nn.Module):
    """
    Dense feed-forward network: a chain of DenseLayer where the output dimension of each layer
    is the input dimension of the next one.
    Accepts single vectors of shape (input_dim,) or batches of shape (batch_size, input_dim).
    """

    def __init__(self, layers: Sequence[DenseLayer]):
        super().__init__()
        if len(layers) == 0:
            raise ValueError("An Mlp needs at least one layer.")
        for position, (layer, next_layer) in enumerate(zip(layers[:-1], layers[1:])):
            if layer.out_dim != next_layer.in_dim:
                raise ValueError(
                    f"Layer {position} outputs {layer.out_dim} values "
                    f"but layer {position + 1} expects {next_layer.in_dim}."
                )
        self.layers = nn.ModuleList(layers)

    @classmethod
    def from_dims(
        cls,
        dims: Sequence[int],
        activations: Optional[Sequence[Activation]] = None,
        seed: Optional[int] = None,
    ) -> "Mlp":
        """
        Build an Mlp from the list of its successive dimensions.
        Args:
            dims: [input_dim, hidden_1, ..., output_dim]
            activations: one activation per layer (len(dims) - 1 values). Defaults to ReLU on
                every layer except the last one, which is Identity.
            seed: seed of the weight initialization. If None, torch's global generator is used.
        Returns:
            the initialized Mlp
        """
        if len(dims) < 2:
            raise ValueError(f"At least 2 dimensions are needed, got {list(dims)}.")
        n_layers = len(dims) - 1
        if activations is None:
            activations = [Activation.RELU] * (n_layers - 1) + [Activation.IDENTITY]
        if len(activations) != n_layers:
            raise ValueError(
                f"Expected {n_layers} activations for dims {list(dims)}, got {len(activations)}."
            )
        generator = None
        if seed is not None:
            generator = torch.Generator().manual_seed(seed)
        return cls(
            [
                DenseLayer(in_dim, out_dim, activation, generator=generator)
                for in_dim, out_dim, activation in zip(dims[:-1], dims[1:], activations)
            ]
        )

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    def forward(self, inputs: Tensor) -> Tensor:
        self._raise_error_if_wrong_input_dim(inputs)
        outputs = inputs.to(DTYPE)
        for layer in self.layers:
            outputs = layer(outputs)
        return outputs

    def input_gradient(self, inputs: Tensor) -> Tensor:
        """
        Exact gradient of a scalar-output Mlp with respect to its input.
        Args:
            inputs: shape (input_dim,) or (batch_size, input_dim)
        Returns:
            gradient of the same shape as inputs. For a batch, row i is the gradient of the
                output of row i.
        """
        if self.output_dim != 1:
            raise ValueError(
                f"Input gradients are defined for scalar outputs, this Mlp outputs {self.output_dim} values."
            )
        with torch.enable_grad():
            leaf = inputs.detach().to(DTYPE).requires_grad_(True)
            (gradient,) = torch.autograd.grad(self(leaf).sum(), leaf)
        return gradient.detach()

    def parameters_vector(self) -> Tensor:
        """Returns all parameters flattened in layer order (weights row-major, then biases)."""
        return torch.cat(
            [
                tensor.detach().flatten()
                for layer in self.layers
                for tensor in (layer.weights, layer.biases)
            ]
        )

    def dims(self) -> List[int]:
        return [self.input_dim] + [layer.out_dim for layer in self.layers]

    def _raise_error_if_wrong_input_dim(self, inputs: Tensor):
        if inputs.ndim not in {1, 2} or inputs.shape[-1] != self.input_dim:
            raise ValueError(
                f"Expected inputs of length {self.input_dim}, got a tensor of shape {tuple(inputs.shape)}."
            )


def forward(model: Mlp, inputs: Tensor) -> Tensor:
    """
    Evaluate the model on finite inputs, without recording gradients.
    Args:
        model: the network
        inputs: shape (input_dim,) or (batch_size, input_dim)
    Returns:
        outputs of shape (output_dim,) or (batch_size, output_dim)
    """
    inputs = torch.as_tensor(inputs, dtype=DTYPE)
    if not torch.isfinite(inputs).all():
        raise ValueError("Inputs of the forward pass must be finite.")
    with torch.no_grad():
        return model(inputs)
