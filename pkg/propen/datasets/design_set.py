from pathlib import Path
from typing import Optional, Sequence, Tuple, Union

import pandas as pd
import torch
from torch import Tensor
from torch.utils.data import Dataset

from propen.modules.dense_mlp import DTYPE

PROPERTY_COLUMN = "y"


class DesignSet(Dataset):
    """
    A set of n designs in R^m, with optionally one property value per design.
    Row i of designs is the design x_i and properties[i] is y_i = g(x_i).
    """

    def __init__(self, designs: Tensor, properties: Optional[Tensor] = None):
        """
        Args:
            designs: tensor of shape (n_designs, design_dimension). Cast to float64.
            properties: tensor of shape (n_designs,), or None if properties are not evaluated yet.
        """
        designs = torch.as_tensor(designs, dtype=DTYPE)
        if designs.ndim != 2:
            raise ValueError(
                f"Designs must be a 2-dim tensor (n_designs, dimension), got shape {tuple(designs.shape)}."
            )
        if not torch.isfinite(designs).all():
            raise ValueError("All design entries must be finite.")
        if properties is not None:
            properties = torch.as_tensor(properties, dtype=DTYPE).flatten()
            if len(properties) != len(designs):
                raise ValueError(
                    f"Got {len(properties)} property values for {len(designs)} designs."
                )
            if not torch.isfinite(properties).all():
                raise ValueError("All property values must be finite.")
        self.designs = designs
        self.properties = properties

    @classmethod
    def from_dataframe(cls, source_dataframe: pd.DataFrame) -> "DesignSet":
        """
        Instantiate a DesignSet from a dataframe with columns x0, ..., x{m-1} and optionally y.
        """
        design_columns = design_column_names(
            len([column for column in source_dataframe.columns if column != PROPERTY_COLUMN])
        )
        missing_columns = set(design_columns) - set(source_dataframe.columns)
        if missing_columns:
            raise ValueError(
                f"Source dataframe must have the columns {design_columns} (and optionally {PROPERTY_COLUMN}), "
                f"but has columns {list(source_dataframe.columns)}"
            )
        designs = torch.tensor(
            source_dataframe[design_columns].to_numpy(dtype=float), dtype=DTYPE
        ).reshape(len(source_dataframe), len(design_columns))
        properties = None
        if PROPERTY_COLUMN in source_dataframe.columns:
            property_values = source_dataframe[PROPERTY_COLUMN]
            if property_values.notna().all():
                properties = torch.tensor(property_values.to_numpy(dtype=float), dtype=DTYPE)
        return cls(designs, properties)

    @classmethod
    def read_csv(cls, path: Union[Path, str]) -> "DesignSet":
        return cls.from_dataframe(pd.read_csv(path))

    def to_dataframe(self) -> pd.DataFrame:
        dataframe = pd.DataFrame(
            self.designs.numpy(), columns=design_column_names(self.dimension)
        )
        dataframe[PROPERTY_COLUMN] = (
            self.properties.numpy() if self.properties is not None else float("nan")
        )
        return dataframe

    def to_csv(self, path: Union[Path, str]) -> None:
        """Write the DesignSet with header x0,...,x{m-1},y (y is empty if properties are unset)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        self.to_dataframe().to_csv(path, index=False)

    @property
    def dimension(self) -> int:
        return self.designs.shape[1]

    def has_properties(self) -> bool:
        return self.properties is not None

    def require_properties(self) -> Tensor:
        if self.properties is None:
            raise ValueError("This DesignSet has no property values.")
        return self.properties

    def with_properties(self, properties: Tensor) -> "DesignSet":
        return DesignSet(self.designs, properties)

    def subset(self, indices: Union[Sequence[int], Tensor]) -> "DesignSet":
        indices = torch.as_tensor(indices, dtype=torch.long)
        return DesignSet(
            self.designs[indices],
            self.properties[indices] if self.properties is not None else None,
        )

    def train_holdout_split(
        self, holdout_fraction: float, seed: int
    ) -> Tuple["DesignSet", "DesignSet"]:
        """
        Split the designs at random into a training set and a holdout set.
        Args:
            holdout_fraction: fraction of designs in the holdout set, in (0, 1).
                The holdout size is rounded, with at least one design on each side.
            seed: seed of the random permutation
        Returns:
            the training set and the holdout set
        """
        if not 0 < holdout_fraction < 1:
            raise ValueError(f"holdout_fraction must be in (0, 1), got {holdout_fraction}.")
        if len(self) < 2:
            raise ValueError("At least 2 designs are needed for a train/holdout split.")
        n_holdout = min(max(round(holdout_fraction * len(self)), 1), len(self) - 1)
        permutation = torch.randperm(len(self), generator=torch.Generator().manual_seed(seed))
        return (
            self.subset(permutation[n_holdout:].sort().values),
            self.subset(permutation[:n_holdout].sort().values),
        )

    def __getitem__(self, index: int) -> Tuple[Tensor, float]:
        return self.designs[index], (
            float(self.properties[index]) if self.properties is not None else float("nan")
        )

    def __len__(self) -> int:
        return len(self.designs)


def design_column_names(dimension: int):
    return [f"x{coordinate}" for coordinate in range(dimension)]
