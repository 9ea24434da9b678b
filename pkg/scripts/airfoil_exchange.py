"""
File exchange with an external airfoil evaluator.

Export writes one coordinate CSV per shape (columns x,y, ordered like the flattened designs)
and a manifest with columns shape_id,path. The evaluator answers with a property file with
columns shape_id,property.
"""

import math
from pathlib import Path
from typing import Callable, Dict, Optional, Tuple

import pandas as pd
import torch
from loguru import logger
from torch import Tensor

from propen.datasets import DesignSet
from propen.exceptions import MalformedPropertyFileError
from propen.modules.dense_mlp import DTYPE

MANIFEST_NAME = "manifest.csv"
MALFORMED_FIELD = "<malformed>"


def export_airfoils(designs: DesignSet, export_dir: Path) -> Path:
    """
    Write each flattened airfoil as a two-column coordinate CSV, plus the manifest.
    Shape ids are the row indices of the DesignSet.
    Returns:
        the path of the manifest
    """
    if designs.dimension % 2 != 0:
        raise ValueError(
            f"Flattened airfoils have an even number of coordinates, got {designs.dimension}."
        )
    export_dir.mkdir(parents=True, exist_ok=True)
    manifest_rows = []
    for shape_id, design in enumerate(designs.designs):
        shape_path = export_dir / f"shape_{shape_id:05d}.csv"
        pd.DataFrame(design.reshape(-1, 2).numpy(), columns=["x", "y"]).to_csv(
            shape_path, index=False
        )
        manifest_rows.append({"shape_id": shape_id, "path": shape_path.name})
    manifest_path = export_dir / MANIFEST_NAME
    pd.DataFrame(manifest_rows, columns=["shape_id", "path"]).to_csv(
        manifest_path, index=False
    )
    logger.info(f"Exported {len(designs)} airfoils to {export_dir}")
    return manifest_path


def read_exported_airfoils(manifest_path: Path) -> Tuple[pd.Series, Tensor]:
    """
    Read back an export.
    Returns:
        the shape ids, and the flattened airfoils of shape (n_shapes, 2 * n_points)
    """
    manifest = pd.read_csv(manifest_path)
    airfoils = torch.stack(
        [
            torch.tensor(
                pd.read_csv(manifest_path.parent / shape_path)[["x", "y"]].to_numpy(),
                dtype=DTYPE,
            ).flatten()
            for shape_path in manifest["path"]
        ]
    )
    return manifest["shape_id"], airfoils


def evaluate_export(
    manifest_path: Path, evaluator: Callable[[Tensor], Tensor], property_path: Path
) -> None:
    """Stand in for an external evaluator: write the evaluator's property of every exported shape."""
    shape_ids, airfoils = read_exported_airfoils(manifest_path)
    property_path.parent.mkdir(parents=True, exist_ok=True)
    pd.DataFrame(
        {"shape_id": shape_ids, "property": evaluator(airfoils).numpy()}
    ).to_csv(property_path, index=False)


def read_property_file(property_path: Path) -> Dict[int, float]:
    """
    Parse a property file with header shape_id,property.
    Returns:
        the property value of each shape id
    Raises:
        MalformedPropertyFileError: listing the line numbers (1-based, header included) of rows
            that do not hold an integer id and a finite value
    """
    raw = pd.read_csv(
        property_path,
        dtype=str,
        keep_default_na=False,
        skip_blank_lines=False,
        engine="python",
        on_bad_lines=lambda fields: [fields[0], MALFORMED_FIELD],
    )
    if list(raw.columns[:2]) != ["shape_id", "property"] or len(raw.columns) != 2:
        raise MalformedPropertyFileError(str(property_path), [1])
    shape_ids = pd.to_numeric(raw["shape_id"].str.strip(), errors="coerce")
    values = pd.to_numeric(raw["property"].str.strip(), errors="coerce")
    is_valid = (
        shape_ids.notna()
        & (shape_ids == shape_ids.round())
        & (values.abs() < math.inf)
    )
    if not is_valid.all():
        raise MalformedPropertyFileError(
            str(property_path), [int(index) + 2 for index in raw.index[~is_valid]]
        )
    return dict(zip(shape_ids.astype(int).tolist(), values.astype(float).tolist()))


def import_properties(designs: DesignSet, property_path: Path) -> DesignSet:
    """
    Set the properties of the exported designs from a property file. Designs with no value
    in the file are excluded, with a warning.
    Returns:
        the designs with a property value, in their original order
    """
    properties = read_property_file(property_path)
    kept_ids = [shape_id for shape_id in range(len(designs)) if shape_id in properties]
    missing_ids = sorted(set(range(len(designs))) - set(kept_ids))
    if missing_ids:
        logger.warning(
            f"No property value for shapes {missing_ids} in {property_path}: they are excluded."
        )
    return designs.subset(kept_ids).with_properties(
        torch.tensor([properties[shape_id] for shape_id in kept_ids], dtype=DTYPE)
    )


def airfoil_roundtrip(
    designs: DesignSet,
    export_dir: Path,
    import_path: Path,
    evaluator: Optional[Callable[[Tensor], Tensor]] = None,
) -> DesignSet:
    """
    Export the designs for an evaluator, then import its property file.
    Args:
        designs: flattened airfoils
        export_dir: where shape CSVs and the manifest are written
        import_path: the evaluator's property file
        evaluator: if given and import_path does not exist yet, it writes import_path
    Returns:
        the designs that received a property value, with these values
    """
    manifest_path = export_airfoils(designs, export_dir)
    if evaluator is not None and not import_path.exists():
        evaluate_export(manifest_path, evaluator, import_path)
    return import_properties(designs, import_path)
