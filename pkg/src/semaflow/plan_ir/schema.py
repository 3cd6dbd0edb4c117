"""Relational schemas: ordered, typed column lists."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import UnknownColumn

COLUMN_TYPES = ("text", "integer", "real", "boolean", "date")

NUMERIC_TYPES = ("integer", "real")


@dataclass(frozen=True)
class Column:
    name: str
    type: str

    def __post_init__(self):
        if self.type not in COLUMN_TYPES:
            raise ValueError(f"unknown column type '{self.type}'")


@dataclass(frozen=True)
class Schema:
    """An ordered list of named, typed columns."""

    columns: tuple[Column, ...]

    @classmethod
    def of(cls, *pairs: tuple[str, str]) -> "Schema":
        return cls(tuple(Column(n, t) for n, t in pairs))

    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.columns)

    def has(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def type_of(self, name: str, node_id: int | None = None) -> str:
        for c in self.columns:
            if c.name == name:
                return c.type
        raise UnknownColumn(name, node_id)

    def index_of(self, name: str) -> int:
        for i, c in enumerate(self.columns):
            if c.name == name:
                return i
        raise UnknownColumn(name)

    def concat(self, other: "Schema") -> "Schema":
        return Schema(self.columns + other.columns)

    def __len__(self) -> int:
        return len(self.columns)

    def to_json(self) -> list[list[str]]:
        return [[c.name, c.type] for c in self.columns]

    @classmethod
    def from_json(cls, data) -> "Schema":
        return cls(tuple(Column(n, t) for n, t in data))
