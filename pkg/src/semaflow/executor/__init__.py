"""Plan execution: relational operators in-process, semantic ops via providers."""

from .engine import ExecutionReport, Executor, execute_plan
from .semantic import (
    CASCADE,
    CascadeSettings,
    ExecSettings,
    NodeStats,
    PER_ROW_LLM,
    SEMANTIC_IMPLS,
    SemanticRunner,
    VECTOR_INDEX,
)
from .source import DataSource, TableSource
from .table import Table, rows_multiset, same_multiset

__all__ = [
    "CASCADE",
    "CascadeSettings",
    "DataSource",
    "ExecSettings",
    "ExecutionReport",
    "Executor",
    "NodeStats",
    "PER_ROW_LLM",
    "SEMANTIC_IMPLS",
    "SemanticRunner",
    "Table",
    "TableSource",
    "VECTOR_INDEX",
    "execute_plan",
    "rows_multiset",
    "same_multiset",
]
