import math

import torch
from torch import Tensor

from propen.modules.dense_mlp import DTYPE
from propen.utils import squared_distances

DEFAULT_BANDWIDTH = 0.01
QUERY_CHUNK_SIZE = 4096


class KdeModel:
    """
    Gaussian kernel density estimate with isotropic bandwidth sigma:
        p(x) = 1/n sum_i N(x; center_i, sigma^2 I)
    with the full gaussian normalization constant.
    It serves both as the toy property oracle (log-density) and as the likelihood model.
    """

    def __init__(self, centers: Tensor, bandwidth: float = DEFAULT_BANDWIDTH):
        """
        Args:
            centers: tensor of shape (n_centers, dimension), n_centers >= 1
            bandwidth: kernel standard deviation sigma
        """
        centers = torch.as_tensor(centers, dtype=DTYPE)
        if centers.ndim != 2 or len(centers) == 0:
            raise ValueError(
                f"KDE centers must be a non-empty 2-dim tensor, got shape {tuple(centers.shape)}."
            )
        if not bandwidth > 0:
            raise ValueError(f"bandwidth must be positive, got {bandwidth}.")
        self.centers = centers
        self.bandwidth = bandwidth

    @property
    def dimension(self) -> int:
        return self.centers.shape[1]

    def log_normalization(self) -> float:
        return -math.log(len(self.centers)) - 0.5 * self.dimension * math.log(
            2 * math.pi * self.bandwidth**2
        )

    def log_kernels(self, queries: Tensor) -> Tensor:
        """
        Log of each center's contribution 1/n N(x; center_i, sigma^2 I).
        Args:
            queries: shape (n_queries, dimension)
        Returns:
            shape (n_queries, n_centers)
        """
        return (
            -squared_distances(queries, self.centers) / (2 * self.bandwidth**2)
            + self.log_normalization()
        )

    def log_density(self, x: Tensor) -> Tensor:
        """
        Log-density, stabilized with log-sum-exp.
        Args:
            x: a point of shape (dimension,) or a batch of shape (n_queries, dimension)
        Returns:
            a 0-dim tensor for a single point, or a tensor of shape (n_queries,)
        """
        x = torch.as_tensor(x, dtype=DTYPE)
        queries = self._as_queries(x)
        if len(queries) == 0:
            return torch.empty(0, dtype=DTYPE)
        log_densities = torch.cat(
            [
                torch.logsumexp(self.log_kernels(chunk), dim=1)
                for chunk in queries.split(QUERY_CHUNK_SIZE)
            ]
        )
        return log_densities[0] if x.ndim == 1 else log_densities

    def density(self, x: Tensor) -> Tensor:
        return self.log_density(x).exp()

    def __call__(self, x: Tensor) -> Tensor:
        return self.log_density(x)

    def gradient(self, x: Tensor) -> Tensor:
        """Gradient of the density p (not of the log-density) at a single point."""
        kernels, differences = self._kernels_and_differences(x)
        return -(kernels[:, None] * differences).sum(dim=0) / self.bandwidth**2

    def hessian(self, x: Tensor) -> Tensor:
        """
        Analytic Hessian of the density p at a single point:
            sum_i k_i(x) [ (x - c_i)(x - c_i)^T / sigma^4 - I / sigma^2 ]
        """
        kernels, differences = self._kernels_and_differences(x)
        outer_products = torch.einsum("n,ni,nj->ij", kernels, differences, differences)
        return outer_products / self.bandwidth**4 - kernels.sum() * torch.eye(
            self.dimension, dtype=DTYPE
        ) / self.bandwidth**2

    def _kernels_and_differences(self, x: Tensor):
        query = self._as_queries(x)
        if len(query) != 1:
            raise ValueError("Derivatives of the density are computed one point at a time.")
        return self.log_kernels(query)[0].exp(), query[0] - self.centers

    def _as_queries(self, x: Tensor) -> Tensor:
        x = torch.as_tensor(x, dtype=DTYPE)
        queries = x.unsqueeze(0) if x.ndim == 1 else x
        if queries.ndim != 2 or queries.shape[1] != self.dimension:
            raise ValueError(
                f"Expected points of length {self.dimension}, got a tensor of shape {tuple(x.shape)}."
            )
        return queries


def kde_log_density(model: KdeModel, x: Tensor) -> float:
    """Log-density of the KDE at a single point."""
    x = torch.as_tensor(x, dtype=DTYPE)
    if x.ndim != 1:
        raise ValueError(f"Expected a single point, got a tensor of shape {tuple(x.shape)}.")
    return float(model.log_density(x))
