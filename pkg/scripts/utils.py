import json
import os
from dataclasses import fields
from itertools import product
from pathlib import Path
from typing import Any, Dict, List, Mapping, Type, TypeVar

OUTPUT_DIR_ENV_VARIABLE = "PROPEN_OUTPUT_DIR"
EXPERIMENT_CONFIGS_DIR = Path("scripts/experiment_configs")

ConfigSection = TypeVar("ConfigSection")


class InvalidConfigError(ValueError):
    """Raised when an experiment config file cannot be turned into a valid ExperimentConfig."""


def read_json_config(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as file:
            raw_config = json.load(file)
    except (OSError, json.JSONDecodeError) as error:
        raise InvalidConfigError(f"Cannot read config {path}: {error}") from error
    if not isinstance(raw_config, dict):
        raise InvalidConfigError(f"Config {path} must hold a JSON object.")
    return raw_config


def build_section(
    section_class: Type[ConfigSection], values: Mapping[str, Any], section_name: str
) -> ConfigSection:
    """
    Instantiate a config dataclass from the flat key/value pairs of one section.
    Args:
        section_class: the dataclass to build. Its __post_init__ validates the values.
        values: the section's keys and values
        section_name: name of the section, used in error messages
    Returns:
        the validated section
    Raises:
        InvalidConfigError: on unknown keys or invalid values
    """
    if not isinstance(values, Mapping):
        raise InvalidConfigError(f"Section {section_name} must be a JSON object.")
    allowed_keys = {field.name for field in fields(section_class)}  # type: ignore[arg-type]
    unknown_keys = sorted(set(values) - allowed_keys)
    if unknown_keys:
        raise InvalidConfigError(
            f"Unknown keys {unknown_keys} in section {section_name}. "
            f"Allowed keys are {sorted(allowed_keys)}."
        )
    try:
        return section_class(**values)
    except (TypeError, ValueError) as error:
        raise InvalidConfigError(f"Invalid section {section_name}: {error}") from error


def output_dir_override(default: Path) -> Path:
    """The output directory, unless overridden by the PROPEN_OUTPUT_DIR environment variable."""
    return Path(os.environ.get(OUTPUT_DIR_ENV_VARIABLE, default))


def unroll_grid(input_dict: Dict[str, list]) -> List[Dict[str, Any]]:
    """
    Unroll a grid of parameters into a list of dicts.
    Args:
        input_dict: each key is a parameter name, each value is a list of values for this parameter.
    Returns:
        a list of dicts, each dict is a combination of parameters.
    Examples:
        >>> unroll_grid({"a": [1, 2], "b": [3, 4]})
        [{"a": 1, "b": 3}, {"a": 1, "b": 4}, {"a": 2, "b": 3}, {"a": 2, "b": 4}]
    """
    return [
        dict(zip(input_dict.keys(), values)) for values in product(*input_dict.values())
    ]
