from typing import Sequence

import torch

from propen.modules.dense_mlp import DTYPE, Activation, DenseLayer, Mlp


def dense_layer(
    weights: Sequence[Sequence[float]],
    biases: Sequence[float],
    activation: Activation = Activation.IDENTITY,
) -> DenseLayer:
    """A DenseLayer with the given parameters."""
    weights_tensor = torch.tensor(weights, dtype=DTYPE)
    layer = DenseLayer(weights_tensor.shape[1], weights_tensor.shape[0], activation)
    with torch.no_grad():
        layer.weights.copy_(weights_tensor)
        layer.biases.copy_(torch.tensor(biases, dtype=DTYPE))
    return layer


def identity_mlp(dimension: int) -> Mlp:
    return Mlp(
        [dense_layer(torch.eye(dimension).tolist(), [0.0] * dimension)]
    )


def shift_mlp(shift: Sequence[float]) -> Mlp:
    """f(x) = x + shift"""
    return Mlp([dense_layer(torch.eye(len(shift)).tolist(), shift)])
