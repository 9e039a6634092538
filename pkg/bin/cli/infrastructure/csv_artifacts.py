"""CSV rendering for reports and per-block traces.

Column order is fixed by the caller. Floats are written with 12
significant digits; booleans as true/false.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Any, Iterable, Sequence

from bin.cli.infrastructure.json_store import write_text
from latticeway.netsim import TraceRow

TRACE_COLUMNS = ("block", "node", "role", "field_combination", "decode_ok")


def format_cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.12g}"
    if value is None:
        return ""
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def render_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


class CsvTraceSink:
    """Writes TraceRow sequences as CSV files."""

    def write(self, path: Path, rows: Sequence[TraceRow]) -> None:
        body = render_csv(
            TRACE_COLUMNS,
            ((r.block, r.node, r.role, r.field_combination, r.decode_ok) for r in rows),
        )
        write_text(path, body)
