"""Data-source contract the executor and optimizer read from.

The catalog implements this over connectors; TableSource implements it over
plain in-memory tables for embedding the engine in other programs (and it
is what the test suites drive generated plans through).
"""

from __future__ import annotations

from typing import Protocol, runtime_checkable

from ..errors import ConnectorError, UnknownDataset
from ..plan_ir import Schema
from .table import Table


@runtime_checkable
class DataSource(Protocol):
    def schema_of(self, dataset: str) -> Schema: ...

    def load_table(self, dataset: str) -> Table: ...

    def row_count(self, dataset: str) -> int: ...

    def run_sql(self, connector: str, sql_text: str) -> Table: ...


class TableSource:
    """A dict of named in-memory tables."""

    def __init__(self, tables: dict[str, Table] | None = None):
        self.tables: dict[str, Table] = dict(tables or {})

    def add(self, name: str, table: Table):
        self.tables[name] = table

    def schema_of(self, dataset: str) -> Schema:
        if dataset not in self.tables:
            raise UnknownDataset(dataset)
        return self.tables[dataset].schema

    def load_table(self, dataset: str) -> Table:
        if dataset not in self.tables:
            raise UnknownDataset(dataset)
        t = self.tables[dataset]
        return Table(schema=t.schema, rows=list(t.rows))

    def row_count(self, dataset: str) -> int:
        if dataset not in self.tables:
            raise UnknownDataset(dataset)
        return len(self.tables[dataset].rows)

    def run_sql(self, connector: str, sql_text: str) -> Table:
        raise ConnectorError(f"ConnectorError: no connector named '{connector}'")
