from abc import abstractmethod
from typing import List, Optional

import torch
from torch import Tensor, nn
from tqdm import tqdm

from propen.modules.dense_mlp import DTYPE

from .trajectory import PropertyOracle, Trajectory


class DesignOptimizer(nn.Module):
    """
    Abstract class providing methods usable by all design optimization methods.
    A design optimizer is trained once, then proposes a trajectory of candidate designs
    for each seed design.
    """

    method_name = "abstract"

    @abstractmethod
    def optimize_seed(
        self,
        seed: Tensor,
        seed_property: Optional[float] = None,
        oracle: Optional[PropertyOracle] = None,
    ) -> Trajectory:
        """
        Propose candidates for one seed.
        Args:
            seed: the seed design of shape (design_dimension,)
            seed_property: property value of the seed, for methods that take it as input
            oracle: if given, used to evaluate the property of every reported design
        Returns:
            the trajectory of designs starting from the seed
        """
        raise NotImplementedError(
            "All design optimizers must implement an optimize_seed method."
        )

    @property
    @abstractmethod
    def design_dimension(self) -> int:
        raise NotImplementedError(
            "All design optimizers must implement a design_dimension property."
        )

    def optimize_seeds(
        self,
        seeds: Tensor,
        seed_properties: Optional[Tensor] = None,
        oracle: Optional[PropertyOracle] = None,
        use_tqdm: bool = False,
    ) -> List[Trajectory]:
        """
        Propose candidates for every seed, in order.
        Args:
            seeds: shape (n_seeds, design_dimension)
            seed_properties: shape (n_seeds,), or None
            oracle: if given, used to evaluate the property of every reported design
            use_tqdm: whether to display a progress bar over seeds
        Returns:
            one trajectory per seed
        """
        seeds = torch.as_tensor(seeds, dtype=DTYPE)
        self._raise_error_if_wrong_seed_dim(seeds)
        trajectories = []
        with tqdm(
            enumerate(seeds),
            total=len(seeds),
            desc=f"Optimizing with {self.method_name}",
            disable=not use_tqdm,
        ) as tqdm_seeds:
            for seed_id, seed in tqdm_seeds:
                trajectories.append(
                    self.optimize_seed(
                        seed,
                        float(seed_properties[seed_id])
                        if seed_properties is not None
                        else None,
                        oracle,
                    )
                )
        return trajectories

    def _raise_error_if_wrong_seed_dim(self, seeds: Tensor):
        if seeds.shape[-1] != self.design_dimension:
            raise ValueError(
                f"Expected seeds of length {self.design_dimension}, got a tensor of shape {tuple(seeds.shape)}."
            )
