"""Dataset catalog: profiles, segments, vectors, and connectors."""

from .connectors import (
    Connector,
    ConnectorInfo,
    FileConnector,
    RawProfile,
    SqliteConnector,
    ToolSpec,
    infer_column_type,
    table_from_string_rows,
)
from .profiler import DatasetProfile, detect_tables, extracted_to_table
from .segmenter import COARSE_MAX_CHARS, FINE_MAX_CHARS, segment_text
from .store import Catalog, ProfileReport, SEGMENT_COLLECTION
from .vectors import VectorStore, sparse_cosine, term_bag

__all__ = [
    "COARSE_MAX_CHARS",
    "Catalog",
    "Connector",
    "ConnectorInfo",
    "DatasetProfile",
    "FINE_MAX_CHARS",
    "FileConnector",
    "ProfileReport",
    "RawProfile",
    "SEGMENT_COLLECTION",
    "SqliteConnector",
    "ToolSpec",
    "VectorStore",
    "detect_tables",
    "extracted_to_table",
    "infer_column_type",
    "segment_text",
    "sparse_cosine",
    "table_from_string_rows",
    "term_bag",
]
