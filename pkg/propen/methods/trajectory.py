from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Optional, Sequence, Union

import pandas as pd
import torch
from torch import Tensor

from propen.datasets.design_set import design_column_names
from propen.exceptions import NonFiniteStateError
from propen.modules.dense_mlp import DTYPE

PropertyOracle = Callable[[Tensor], Tensor]

TRAJECTORY_COLUMNS_PREFIX = ["seed_id", "step"]


@dataclass(frozen=True)
class OptimizeConfig:
    """
    Stopping rule of iterative optimization: stop when the step norm ||x_t - x_{t-1}|| falls
    below convergence_eps, or after max_steps steps.
    If record_all is False, only the seed and the final state are kept.
    """

    max_steps: int = 30
    convergence_eps: float = 1e-4
    record_all: bool = True

    def __post_init__(self):
        if self.max_steps < 1:
            raise ValueError(f"max_steps must be at least 1, got {self.max_steps}.")
        if not self.convergence_eps > 0:
            raise ValueError(
                f"convergence_eps must be positive, got {self.convergence_eps}."
            )


@dataclass
class Trajectory:
    """
    Designs visited from a seed. states[0] is the seed (or its reconstruction for latent-space
    methods) and states[-1] is the final candidate.
    """

    states: Tensor
    property_values: Optional[Tensor] = None
    converged: bool = False
    steps_taken: int = 0

    @property
    def final_state(self) -> Tensor:
        return self.states[-1]

    @property
    def dimension(self) -> int:
        return self.states.shape[1]

    def evaluate(self, oracle: PropertyOracle) -> "Trajectory":
        """Fill property_values with the oracle's value on every state."""
        self.property_values = torch.as_tensor(oracle(self.states), dtype=DTYPE).flatten()
        return self

    def to_dataframe(self, seed_id: int, method: Optional[str] = None) -> pd.DataFrame:
        """
        One row per state, with columns seed_id, step, x0, ..., x{m-1}, property
        (and a leading method column if a method name is given).
        With record_all off, the final state is reported at step steps_taken.
        """
        steps = list(range(len(self.states)))
        if len(self.states) == 2 and self.steps_taken > 1:
            steps = [0, self.steps_taken]
        dataframe = pd.DataFrame(
            self.states.numpy(), columns=design_column_names(self.dimension)
        )
        dataframe.insert(0, "step", steps)
        dataframe.insert(0, "seed_id", seed_id)
        dataframe["property"] = (
            self.property_values.numpy()
            if self.property_values is not None
            else float("nan")
        )
        if method is not None:
            dataframe.insert(0, "method", method)
        return dataframe


def trajectories_to_dataframe(
    trajectories: Sequence[Trajectory], method: Optional[str] = None
) -> pd.DataFrame:
    """Stack trajectories, using their position in the sequence as seed_id."""
    if len(trajectories) == 0:
        return pd.DataFrame(columns=TRAJECTORY_COLUMNS_PREFIX + ["property"])
    return pd.concat(
        [
            trajectory.to_dataframe(seed_id, method)
            for seed_id, trajectory in enumerate(trajectories)
        ],
        ignore_index=True,
    )


def trajectories_to_csv(
    trajectories: Sequence[Trajectory],
    path: Union[Path, str],
    method: Optional[str] = None,
) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    trajectories_to_dataframe(trajectories, method).to_csv(path, index=False)


def iterate_design(
    step_function: Callable[[Tensor], Tensor],
    initial_state: Tensor,
    config: OptimizeConfig,
    design_dimension: Optional[int] = None,
    oracle: Optional[PropertyOracle] = None,
) -> Trajectory:
    """
    Re-feed a state to a step function until it reaches an approximate fixed point:
    s_t = step_function(s_{t-1}).
    Args:
        step_function: maps a state to the next one
        initial_state: the first state. Its first design_dimension coordinates are the seed design.
        config: stopping rule
        design_dimension: number of leading state coordinates that make up the design. The
            remaining ones (e.g. a predicted property) are carried along but not reported,
            and do not count in the convergence test. Defaults to the full state.
        oracle: if given, evaluated on every reported design
    Returns:
        the trajectory of designs
    Raises:
        NonFiniteStateError: if the step function returns a non-finite state. The error holds
            the trajectory up to the last finite state.
    """
    state = torch.as_tensor(initial_state, dtype=DTYPE)
    design_dimension = design_dimension or len(state)
    designs = [state[:design_dimension]]
    converged = False
    steps_taken = 0

    for step in range(1, config.max_steps + 1):
        next_state = step_function(state)
        if not torch.isfinite(next_state).all():
            raise NonFiniteStateError(
                step, Trajectory(torch.stack(designs), steps_taken=steps_taken)
            )
        step_norm = torch.linalg.vector_norm(
            next_state[:design_dimension] - state[:design_dimension]
        )
        state = next_state
        steps_taken = step
        if config.record_all or step == 1:
            designs.append(state[:design_dimension])
        else:
            designs[-1] = state[:design_dimension]
        if step_norm < config.convergence_eps:
            converged = True
            break

    trajectory = Trajectory(
        torch.stack(designs), converged=converged, steps_taken=steps_taken
    )
    if oracle is not None:
        trajectory.evaluate(oracle)
    return trajectory
