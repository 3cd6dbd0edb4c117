"""In-memory tables: a schema plus a list of row tuples."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator

from ..plan_ir import Schema


@dataclass
class Table:
    schema: Schema
    rows: list[tuple] = field(default_factory=list)

    def column_names(self) -> tuple[str, ...]:
        return self.schema.names()

    def iter_dicts(self) -> Iterator[dict[str, Any]]:
        names = self.schema.names()
        for row in self.rows:
            yield dict(zip(names, row))

    def column_values(self, name: str) -> list[Any]:
        idx = self.schema.index_of(name)
        return [row[idx] for row in self.rows]

    def __len__(self) -> int:
        return len(self.rows)

    def to_json(self) -> dict:
        return {
            "columns": [[c.name, c.type] for c in self.schema.columns],
            "rows": [list(r) for r in self.rows],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Table":
        return cls(
            schema=Schema.from_json(doc["columns"]),
            rows=[tuple(r) for r in doc["rows"]],
        )


def rows_multiset(table: Table) -> dict:
    """Row multiset for order-insensitive comparison."""
    out: dict = {}
    for row in table.rows:
        key = tuple(repr(v) for v in row)
        out[key] = out.get(key, 0) + 1
    return out


def same_multiset(a: Table, b: Table) -> bool:
    return a.schema.names() == b.schema.names() and rows_multiset(a) == rows_multiset(b)
