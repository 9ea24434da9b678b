"""
Binary serialization of Mlp parameters.

Layout (little-endian):
    magic b"PRPN", version (u32), number of layers (u32),
    for each layer: in_dim (u32), out_dim (u32), activation tag (u32),
    then for each layer its weights (row-major) followed by its biases, as float64.
"""

import struct
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import torch

from .dense_mlp import DTYPE, Activation, DenseLayer, Mlp

MAGIC = b"PRPN"
FORMAT_VERSION = 1
ACTIVATION_TAGS = {Activation.RELU: 0, Activation.IDENTITY: 1}
TAG_ACTIVATIONS = {tag: activation for activation, tag in ACTIVATION_TAGS.items()}
LITTLE_ENDIAN_FLOAT = np.dtype("<f8")


def save_mlp(model: Mlp, path: Union[Path, str]) -> None:
    """
    Write the model's architecture and parameters to a PRPN file.
    Args:
        model: the network to save
        path: destination file. Parent directories are created if needed.
    """
    header = MAGIC + struct.pack("<II", FORMAT_VERSION, len(model.layers))
    for layer in model.layers:
        header += struct.pack(
            "<III", layer.in_dim, layer.out_dim, ACTIVATION_TAGS[layer.activation]
        )
    body = b"".join(
        tensor.detach().cpu().numpy().astype(LITTLE_ENDIAN_FLOAT).tobytes(order="C")
        for layer in model.layers
        for tensor in (layer.weights, layer.biases)
    )
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(header + body)


def load_mlp(path: Union[Path, str]) -> Mlp:
    """
    Read a PRPN file written by save_mlp.
    Args:
        path: the PRPN file
    Returns:
        an Mlp with the saved architecture and parameters
    Raises:
        ValueError: if the file is not a valid PRPN file
    """
    content = Path(path).read_bytes()
    if content[:4] != MAGIC:
        raise ValueError(f"{path} is not a PRPN file (bad magic number).")
    version, n_layers = struct.unpack_from("<II", content, 4)
    if version != FORMAT_VERSION:
        raise ValueError(
            f"Unsupported PRPN version {version}, expected {FORMAT_VERSION}."
        )
    offset = 12
    layer_specs: List[Tuple[int, int, Activation]] = []
    for _ in range(n_layers):
        in_dim, out_dim, tag = struct.unpack_from("<III", content, offset)
        if tag not in TAG_ACTIVATIONS:
            raise ValueError(f"Unknown activation tag {tag} in {path}.")
        layer_specs.append((in_dim, out_dim, TAG_ACTIVATIONS[tag]))
        offset += 12

    expected_size = offset + 8 * sum(
        out_dim * in_dim + out_dim for in_dim, out_dim, _ in layer_specs
    )
    if len(content) != expected_size:
        raise ValueError(
            f"{path} holds {len(content)} bytes but its header announces {expected_size}."
        )

    layers = []
    for in_dim, out_dim, activation in layer_specs:
        layer = DenseLayer(in_dim, out_dim, activation)
        weights = np.frombuffer(
            content, dtype=LITTLE_ENDIAN_FLOAT, count=out_dim * in_dim, offset=offset
        )
        offset += 8 * out_dim * in_dim
        biases = np.frombuffer(
            content, dtype=LITTLE_ENDIAN_FLOAT, count=out_dim, offset=offset
        )
        offset += 8 * out_dim
        with torch.no_grad():
            layer.weights.copy_(
                torch.tensor(weights.reshape(out_dim, in_dim), dtype=DTYPE)
            )
            layer.biases.copy_(torch.tensor(biases, dtype=DTYPE))
        layers.append(layer)
    return Mlp(layers)
