"""Data connectors: self-describing adapters between storage and the catalog.

describe() advertises name, capabilities, and tool signatures so the
planner can inject the available surface into its prompts. data_profile()
returns the raw structure of one dataset.
"""

from __future__ import annotations

import csv
import json
import re
import sqlite3
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol

from ..errors import ConnectorError, EmptyDataset, UnknownDataset
from ..plan_ir import Column, Schema
from ..executor.table import Table

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


@dataclass(frozen=True)
class ToolSpec:
    tool_name: str
    params_schema: dict

    def to_dict(self) -> dict:
        return {"tool_name": self.tool_name, "params_schema": self.params_schema}


@dataclass(frozen=True)
class ConnectorInfo:
    name: str
    capabilities: tuple[str, ...]
    tools: tuple[ToolSpec, ...]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "capabilities": list(self.capabilities),
            "tools": [t.to_dict() for t in self.tools],
        }


@dataclass
class RawProfile:
    """Structure report for one dataset, before summarization."""

    kind: str  # "structured" | "unstructured"
    format: str
    schema: Schema | None = None
    rows: list[tuple] = field(default_factory=list)
    text: str | None = None


class Connector(Protocol):
    name: str

    def describe(self) -> ConnectorInfo: ...

    def list_datasets(self) -> list[tuple[str, str]]: ...

    def data_profile(self, locator: str) -> RawProfile: ...

    def read_table(self, locator: str) -> Table: ...


def infer_column_type(values: list[str]) -> str:
    """CSV-style type inference over string cells (empty = missing)."""
    present = [v for v in values if v != ""]
    if not present:
        return "text"
    if all(re.fullmatch(r"[+-]?\d+", v) for v in present):
        return "integer"
    if all(re.fullmatch(r"[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?", v) for v in present):
        return "real"
    if all(v.lower() in ("true", "false") for v in present):
        return "boolean"
    if all(_DATE_RE.fullmatch(v) for v in present):
        return "date"
    return "text"


def convert_cell(value: str, type_: str):
    if value == "":
        return None
    if type_ == "integer":
        return int(value)
    if type_ == "real":
        return float(value)
    if type_ == "boolean":
        return value.lower() == "true"
    return value


def table_from_string_rows(header: list[str], string_rows: list[list[str]]) -> Table:
    types = [
        infer_column_type([row[i] if i < len(row) else "" for row in string_rows])
        for i in range(len(header))
    ]
    schema = Schema(tuple(Column(n, t) for n, t in zip(header, types)))
    rows = [
        tuple(
            convert_cell(row[i] if i < len(row) else "", types[i])
            for i in range(len(header))
        )
        for row in string_rows
    ]
    return Table(schema=schema, rows=rows)


def sanitize_column_name(raw: str, index: int) -> str:
    name = re.sub(r"[^0-9a-zA-Z]+", "_", raw.strip()).strip("_").lower()
    return name or f"col{index}"


class FileConnector:
    """Local directory of .csv, .json, and .txt datasets."""

    SUFFIXES = (".csv", ".json", ".txt")

    def __init__(self, name: str, root: str | Path):
        self.name = name
        self.root = Path(root)

    def describe(self) -> ConnectorInfo:
        return ConnectorInfo(
            name=self.name,
            capabilities=("structured_files", "unstructured_files"),
            tools=(
                ToolSpec("read_rows", {"dataset": "string"}),
                ToolSpec("read_text", {"dataset": "string"}),
            ),
        )

    def list_datasets(self) -> list[tuple[str, str]]:
        if not self.root.exists():
            return []
        out = []
        for path in sorted(self.root.iterdir()):
            if path.suffix in self.SUFFIXES and path.is_file():
                out.append((path.stem, path.name))
        return out

    def _path(self, locator: str) -> Path:
        path = self.root / locator
        if not path.exists():
            raise UnknownDataset(locator)
        return path

    def data_profile(self, locator: str) -> RawProfile:
        path = self._path(locator)
        if path.suffix == ".csv":
            table = self._read_csv(path)
            return RawProfile(
                kind="structured", format="csv", schema=table.schema, rows=table.rows
            )
        if path.suffix == ".json":
            text = path.read_text(encoding="utf-8")
            if not text.strip():
                raise EmptyDataset(path.stem)
            try:
                data = json.loads(text)
            except json.JSONDecodeError:
                data = None
            if isinstance(data, list) and data and all(isinstance(r, dict) for r in data):
                table = self._rows_from_json(data)
                return RawProfile(
                    kind="structured", format="json", schema=table.schema, rows=table.rows
                )
            return RawProfile(kind="unstructured", format="json", text=text)
        text = path.read_text(encoding="utf-8")
        if not text.strip():
            raise EmptyDataset(path.stem)
        return RawProfile(kind="unstructured", format="txt", text=text)

    def _read_csv(self, path: Path) -> Table:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            rows = [row for row in reader if row]  # blank lines are not records
        if not rows or len(rows) < 2:
            raise EmptyDataset(path.stem)
        header = [sanitize_column_name(h, i) for i, h in enumerate(rows[0])]
        return table_from_string_rows(header, rows[1:])

    def _rows_from_json(self, data: list[dict]) -> Table:
        header = [sanitize_column_name(k, i) for i, k in enumerate(data[0].keys())]
        keys = list(data[0].keys())
        string_rows = [
            ["" if r.get(k) is None else str(r.get(k)) for k in keys] for r in data
        ]
        # unquote booleans that str() capitalized
        string_rows = [
            [c.lower() if c in ("True", "False") else c for c in row]
            for row in string_rows
        ]
        return table_from_string_rows(header, string_rows)

    def read_table(self, locator: str) -> Table:
        profile = self.data_profile(locator)
        if profile.kind != "structured":
            raise ConnectorError(
                f"ConnectorError: dataset '{locator}' on connector '{self.name}' is not tabular"
            )
        return Table(schema=profile.schema, rows=list(profile.rows))

    def read_text(self, locator: str) -> str:
        return self._path(locator).read_text(encoding="utf-8")


_SQLITE_TYPE_MAP = [
    ("INT", "integer"),
    ("CHAR", "text"),
    ("CLOB", "text"),
    ("TEXT", "text"),
    ("BLOB", "text"),
    ("REAL", "real"),
    ("FLOA", "real"),
    ("DOUB", "real"),
    ("BOOL", "boolean"),
    ("DATE", "date"),
    ("NUM", "real"),
]


def _sqlite_type(declared: str) -> str:
    upper = (declared or "").upper()
    for needle, mapped in _SQLITE_TYPE_MAP:
        if needle in upper:
            return mapped
    return "text"


class SqliteConnector:
    """SQL connector over a local relational store."""

    def __init__(self, name: str, path: str | Path):
        self.name = name
        self.path = Path(path)
        if not self.path.exists():
            raise ConnectorError(f"ConnectorError: sqlite file not found: {self.path}")
        self._conn = sqlite3.connect(str(self.path), check_same_thread=False)

    def describe(self) -> ConnectorInfo:
        return ConnectorInfo(
            name=self.name,
            capabilities=("sql",),
            tools=(
                ToolSpec("query", {"sql": "string"}),
                ToolSpec("table_rows", {"table": "string"}),
            ),
        )

    def list_datasets(self) -> list[tuple[str, str]]:
        cur = self._conn.execute(
            "SELECT name FROM sqlite_master WHERE type = 'table' "
            "AND name NOT LIKE 'sqlite_%' ORDER BY name"
        )
        return [(row[0], row[0]) for row in cur.fetchall()]

    def _table_schema(self, table: str) -> Schema:
        quoted = table.replace('"', '""')
        cur = self._conn.execute(f'PRAGMA table_info("{quoted}")')
        info = cur.fetchall()
        if not info:
            raise UnknownDataset(table)
        return Schema(tuple(Column(row[1], _sqlite_type(row[2])) for row in info))

    def data_profile(self, locator: str) -> RawProfile:
        schema = self._table_schema(locator)
        table = self.read_table(locator)
        if not table.rows:
            raise EmptyDataset(locator)
        return RawProfile(kind="structured", format="sqlite", schema=schema, rows=table.rows)

    def read_table(self, locator: str) -> Table:
        schema = self._table_schema(locator)
        quoted = locator.replace('"', '""')
        cur = self._conn.execute(f'SELECT * FROM "{quoted}"')
        rows = []
        for raw in cur.fetchall():
            rows.append(
                tuple(
                    bool(v) if c.type == "boolean" and v is not None else v
                    for v, c in zip(raw, schema.columns)
                )
            )
        return Table(schema=schema, rows=rows)

    def query(self, sql: str) -> Table:
        try:
            cur = self._conn.execute(sql)
            raw_rows = cur.fetchall()
        except sqlite3.Error as e:
            raise ConnectorError(f"ConnectorError: {e}") from e
        if cur.description is None:
            return Table(schema=Schema(()), rows=[])
        names = [d[0] for d in cur.description]
        types = []
        for i in range(len(names)):
            values = [r[i] for r in raw_rows if r[i] is not None]
            if values and all(isinstance(v, bool) for v in values):
                types.append("boolean")
            elif values and all(isinstance(v, int) for v in values):
                types.append("integer")
            elif values and all(isinstance(v, (int, float)) for v in values):
                types.append("real")
            elif values and all(isinstance(v, str) and _DATE_RE.fullmatch(v) for v in values):
                types.append("date")
            else:
                types.append("text")
        schema = Schema(tuple(Column(n, t) for n, t in zip(names, types)))
        rows = [tuple(float(v) if t == "real" and v is not None else v for v, t in zip(r, types)) for r in raw_rows]
        return Table(schema=schema, rows=rows)
