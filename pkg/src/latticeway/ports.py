"""Ports the application shell implements.

Usecases read experiment configurations and write per-block traces
through these protocols; filesystem adapters are injected by the
container.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Protocol, Sequence, runtime_checkable

from latticeway.netsim import TraceRow


@runtime_checkable
class ConfigSource(Protocol):
    """Reads an experiment configuration document into plain data."""

    def load(self, path: Path) -> dict[str, Any]:
        """Return the document at path.

        Raises ConfigError when the document is missing, unparseable,
        or not a mapping.
        """
        ...


@runtime_checkable
class TraceSink(Protocol):
    """Persists per-block trace rows."""

    def write(self, path: Path, rows: Sequence[TraceRow]) -> None:
        """Write rows in block order, replacing any existing file."""
        ...
