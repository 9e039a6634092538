"""Filesystem ConfigSource: experiment configs as JSON or YAML.

The suffix picks the parser: .yaml and .yml go through yaml.safe_load,
anything else is read as JSON.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import yaml

from bin.cli.infrastructure.json_store import read_json_object
from latticeway.exceptions import ConfigError


class FilesystemConfigSource:
    """Reads configuration documents from disk."""

    def load(self, path: Path) -> dict[str, Any]:
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            if path.suffix.lower() in (".yaml", ".yml"):
                data = yaml.safe_load(path.read_text(encoding="utf-8"))
            else:
                data = read_json_object(path)
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise ConfigError(f"cannot parse {path}: {e}") from e
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise ConfigError(f"{path} must contain a mapping, got {type(data).__name__}")
        return data
