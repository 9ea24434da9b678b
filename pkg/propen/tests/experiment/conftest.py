import json

import pytest


@pytest.fixture
def tiny_raw_config(tmp_path, monkeypatch):
    """A fast toy experiment writing to a temporary directory."""
    monkeypatch.delenv("PROPEN_OUTPUT_DIR", raising=False)
    return {
        "dataset": {"family": "8gaussians", "n_samples": 40, "target_dim": 3, "kde_bandwidth": 0.3},
        "matching": {"delta_x": 1.0, "delta_y": 2.0},
        "architecture": {"hidden_width": 8, "n_hidden_layers": 1, "latent_dim": 4},
        "training": {"epochs": 3, "batch_size": 16},
        "optimization": {"max_steps": 4},
        "methods": [
            {"name": "x2x"},
            {"name": "mix_xy2xy", "mix_beta": 0.5},
            {"name": "explicit", "n_steps": 3},
            {"name": "tabular"},
        ],
        "repetitions": 2,
        "output_dir": str(tmp_path / "results"),
    }


@pytest.fixture
def write_config(tmp_path):
    def _write_config(raw_config, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(raw_config))
        return path

    return _write_config
