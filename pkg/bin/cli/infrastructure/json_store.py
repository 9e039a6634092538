"""Low-level JSON I/O helpers.

Reports are written with two-space indentation, non-ASCII kept, and a
trailing newline. Key order is the model's field order, so identical
inputs give identical bytes.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

from pydantic import BaseModel


def read_json_object(path: Path) -> Any | None:
    """Read a JSON document from a file, returning None if missing."""
    if not path.exists():
        return None
    return json.loads(path.read_text(encoding="utf-8"))


def dumps_json_object(data: dict) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def dumps_model(model: BaseModel) -> str:
    """Serialize a response model the way every report is written."""
    return dumps_json_object(model.model_dump(mode="json"))


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
