from typing import TYPE_CHECKING, Optional

if TYPE_CHECKING:
    from propen.methods.trajectory import Trajectory


class EmptyMatchedDatasetError(ValueError):
    """Raised when matching produced no pair to train on."""

    def __init__(self, message: Optional[str] = None):
        super().__init__(
            message
            or "The matched dataset is empty. "
            "Relax the matching thresholds (increase delta_x or delta_y, or lower delta_y_lower)."
        )


class UnmatchedSeedError(ValueError):
    """Raised when an operation needs the matches of a seed that has none."""

    def __init__(self, seed_index: int):
        super().__init__(f"Design {seed_index} has no match in the matched dataset.")
        self.seed_index = seed_index


class NonFiniteTrainingError(RuntimeError):
    """Raised when the training loss becomes NaN or infinite."""

    def __init__(self, epoch: int, batch: int, loss: float):
        super().__init__(
            f"Non-finite training loss ({loss}) at epoch {epoch}, batch {batch}. "
            "Try a lower learning rate or check the training data for extreme values."
        )
        self.epoch = epoch
        self.batch = batch


class NonFiniteStateError(RuntimeError):
    """Raised when iterative optimization reaches a non-finite design."""

    def __init__(self, step: int, trajectory: "Trajectory"):
        super().__init__(
            f"Non-finite design encountered at step {step}. "
            f"The partial trajectory holds {len(trajectory.states)} states."
        )
        self.step = step
        self.trajectory = trajectory


class MalformedPropertyFileError(ValueError):
    """Raised when an imported property file has unparsable rows."""

    def __init__(self, path: str, line_numbers: list):
        super().__init__(
            f"Malformed rows in property file {path} at lines {line_numbers}. "
            "Each row must be '<shape_id>,<finite property value>'."
        )
        self.line_numbers = line_numbers
