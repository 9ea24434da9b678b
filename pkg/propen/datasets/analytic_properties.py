from typing import Tuple, Union

import torch
from torch import Tensor

from propen.modules.dense_mlp import DTYPE


class LinearProperty:
    """g(x) = w . x, with gradient w."""

    def __init__(self, weights: Tensor):
        self.weights = torch.as_tensor(weights, dtype=DTYPE).flatten()

    @property
    def dimension(self) -> int:
        return len(self.weights)

    def value_and_gradient(self, x: Tensor) -> Tuple[float, Tensor]:
        x = _check_point(x, self.dimension)
        return float(self.weights @ x), self.weights.clone()

    def __call__(self, x: Tensor) -> Tensor:
        """Property values of a single point (0-dim result) or of a batch of points."""
        return torch.as_tensor(x, dtype=DTYPE) @ self.weights


class QuadraticProperty:
    """
    g(x) = -(x - b)^T A (x - b), with A positive semidefinite.
    Its gradient is -2 A (x - b) (A is symmetrized on construction) and its maximum is at b.
    """

    def __init__(self, matrix: Tensor, center: Tensor):
        matrix = torch.as_tensor(matrix, dtype=DTYPE)
        center = torch.as_tensor(center, dtype=DTYPE).flatten()
        if matrix.shape != (len(center), len(center)):
            raise ValueError(
                f"Matrix of shape {tuple(matrix.shape)} does not match a center of length {len(center)}."
            )
        self.matrix = (matrix + matrix.T) / 2
        if torch.linalg.eigvalsh(self.matrix).min() < -1e-12:
            raise ValueError("The matrix of a quadratic property must be positive semidefinite.")
        self.center = center

    @property
    def dimension(self) -> int:
        return len(self.center)

    def smoothness(self) -> float:
        """Lipschitz constant of the gradient, 2 ||A||_2."""
        return 2 * float(torch.linalg.matrix_norm(self.matrix, ord=2))

    def value_and_gradient(self, x: Tensor) -> Tuple[float, Tensor]:
        offset = _check_point(x, self.dimension) - self.center
        return float(-offset @ self.matrix @ offset), -2 * self.matrix @ offset

    def __call__(self, x: Tensor) -> Tensor:
        offsets = torch.as_tensor(x, dtype=DTYPE) - self.center
        return -((offsets @ self.matrix) * offsets).sum(dim=-1)


AnalyticProperty = Union[LinearProperty, QuadraticProperty]


def analytic_property(kind: AnalyticProperty, x: Tensor) -> Tuple[float, Tensor]:
    """
    Evaluate an analytic test property and its exact gradient.
    Args:
        kind: a LinearProperty or a QuadraticProperty
        x: point of shape (dimension,)
    Returns:
        the property value and its gradient at x
    Raises:
        ValueError: if x does not have the property's dimension
    """
    return kind.value_and_gradient(x)


def _check_point(x: Tensor, dimension: int) -> Tensor:
    x = torch.as_tensor(x, dtype=DTYPE)
    if x.shape != (dimension,):
        raise ValueError(f"Expected a point of length {dimension}, got shape {tuple(x.shape)}.")
    return x
