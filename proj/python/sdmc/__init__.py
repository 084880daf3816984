"""Stochastic noise-decoupling simulator for interacting quantum systems."""

from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Any, Mapping

from . import _core
from ._core import (
    ConfigError,
    DimensionCapExceeded,
    RunResult,
    TrajectoryBlowUp,
    ValidationError,
    matrix_exp,
    partial_trace,
)

__all__ = [
    "ConfigError",
    "DimensionCapExceeded",
    "RunResult",
    "TrajectoryBlowUp",
    "ValidationError",
    "load_config",
    "manifest",
    "matrix_exp",
    "partial_trace",
    "preset",
    "preset_names",
    "run",
]


def preset_names() -> list[str]:
    return list(_core.preset_names())


def preset(name: str, **overrides: Any) -> dict:
    """Preset configuration as a dict; keyword arguments replace top-level keys."""
    config = json.loads(_core.preset_config_json(name))
    config.update(overrides)
    return config


def load_config(path: str | os.PathLike) -> dict:
    """Reads a config file, inlining a model given as a relative file path."""
    path = Path(path)
    config = json.loads(path.read_text())
    if isinstance(config.get("model"), str):
        config["model"] = json.loads((path.parent / config["model"]).read_text())
    return json.loads(_core.normalize_config_json(json.dumps(config)))


def run(config: Mapping[str, Any] | str | os.PathLike) -> RunResult:
    """Runs a config given as a dict, a JSON string, or a file path."""
    if isinstance(config, Mapping):
        text = json.dumps(config)
    elif isinstance(config, os.PathLike) or (isinstance(config, str) and not config.lstrip().startswith("{")):
        text = json.dumps(load_config(config))
    else:
        text = config
    return _core.run_json(text)


def manifest(result: RunResult) -> dict:
    return json.loads(result.manifest_json)
