"""Filesystem adapters: config documents, CSV artifacts, JSON reports.

These test the *how* of the file formats: parser selection by suffix,
cell formatting, indentation, missing-file handling. The ports they
implement are exercised end to end by the CLI suite.
"""

from __future__ import annotations

import json

import pytest
from pydantic import BaseModel

from bin.cli.infrastructure.config_source import FilesystemConfigSource
from bin.cli.infrastructure.csv_artifacts import (
    TRACE_COLUMNS,
    CsvTraceSink,
    format_cell,
    render_csv,
)
from bin.cli.infrastructure.json_store import (
    dumps_json_object,
    dumps_model,
    read_json_object,
    write_text,
)
from latticeway.exceptions import ConfigError
from latticeway.netsim import Duplex, NodeRole, TraceRow


# ---------------------------------------------------------------------------
# Config documents
# ---------------------------------------------------------------------------


class TestFilesystemConfigSource:
    def test_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text('{"command": "rates"}')
        assert FilesystemConfigSource().load(path) == {"command": "rates"}

    @pytest.mark.parametrize("suffix", [".yaml", ".yml", ".YAML"])
    def test_yaml(self, tmp_path, suffix):
        path = tmp_path / f"c{suffix}"
        path.write_text("network:\n  powers: [1, 4, 4, 1]\n")
        assert FilesystemConfigSource().load(path) == {"network": {"powers": [1, 4, 4, 1]}}

    def test_empty_yaml_is_empty_mapping(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("")
        assert FilesystemConfigSource().load(path) == {}

    def test_missing(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            FilesystemConfigSource().load(tmp_path / "absent.json")

    def test_directory_is_missing(self, tmp_path):
        with pytest.raises(ConfigError):
            FilesystemConfigSource().load(tmp_path)

    def test_bad_json(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text("{command: rates")
        with pytest.raises(ConfigError, match="cannot parse"):
            FilesystemConfigSource().load(path)

    def test_bad_yaml(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("network: [1, 2\n")
        with pytest.raises(ConfigError, match="cannot parse"):
            FilesystemConfigSource().load(path)

    def test_not_a_mapping(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("- 1\n- 2\n")
        with pytest.raises(ConfigError, match="mapping, got list"):
            FilesystemConfigSource().load(path)


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


class TestFormatCell:
    def test_float_precision(self):
        assert format_cell(1 / 3) == "0.333333333333"
        assert format_cell(0.5) == "0.5"
        assert format_cell(0.0) == "0"

    def test_booleans(self):
        assert format_cell(True) == "true"
        assert format_cell(False) == "false"

    def test_none_is_blank(self):
        assert format_cell(None) == ""

    def test_enums_by_value(self):
        assert format_cell(NodeRole.RELAY) == "relay"
        assert format_cell(Duplex.HALF) == "half"

    def test_ints_and_strings(self):
        assert format_cell(7) == "7"
        assert format_cell("3/2") == "3/2"


class TestRenderCsv:
    def test_header_and_rows(self):
        body = render_csv(("a", "b"), [(1, True), (0.25, None)])
        assert body == "a,b\n1,true\n0.25,\n"

    def test_quotes_commas(self):
        body = render_csv(("point",), [("(1, 2)",)])
        assert body.splitlines()[1] == '"(1, 2)"'

    def test_header_only(self):
        assert render_csv(("a",), []) == "a\n"


class TestCsvTraceSink:
    def test_writes_rows_in_order(self, tmp_path):
        rows = [
            TraceRow(1, 2, NodeRole.RELAY, "1*a1", True),
            TraceRow(2, 1, NodeRole.END, "b1", False),
        ]
        path = tmp_path / "nested" / "trace.csv"
        CsvTraceSink().write(path, rows)
        assert path.read_text().splitlines() == [
            ",".join(TRACE_COLUMNS),
            "1,2,relay,1*a1,true",
            "2,1,end,b1,false",
        ]

    def test_replaces_existing(self, tmp_path):
        path = tmp_path / "trace.csv"
        path.write_text("stale\n")
        CsvTraceSink().write(path, [])
        assert path.read_text() == ",".join(TRACE_COLUMNS) + "\n"


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


class _Report(BaseModel):
    name: str
    rate: float
    duplex: Duplex


class TestJsonStore:
    def test_indent_and_newline(self):
        text = dumps_json_object({"b": 1, "a": [1, 2]})
        assert text.endswith("}\n")
        assert '\n  "b": 1,' in text
        assert list(json.loads(text)) == ["b", "a"]

    def test_non_ascii_kept(self):
        assert "θ" in dumps_json_object({"symbol": "θ"})

    def test_model_field_order(self):
        text = dumps_model(_Report(name="x", rate=0.5, duplex=Duplex.FULL))
        assert json.loads(text) == {"name": "x", "rate": 0.5, "duplex": "full"}
        assert text.index('"name"') < text.index('"rate"') < text.index('"duplex"')

    def test_read_missing_is_none(self, tmp_path):
        assert read_json_object(tmp_path / "absent.json") is None

    def test_write_text_creates_parents(self, tmp_path):
        path = tmp_path / "a" / "b" / "report.json"
        write_text(path, "{}\n")
        assert read_json_object(path) == {}
