"""Dataset profiling: structure discovery, segmentation, table extraction,
and summarization.

Unstructured documents are scanned for embedded tables: three or more
consecutive lines sharing the same positive delimiter count (pipe, tab, or
comma) form a block, which is lifted into a new structured dataset so the
planner can treat it relationally.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..errors import ProviderError
from ..plan_ir import Schema
from ..provider.base import ChatProvider, ChatRequest
from .connectors import sanitize_column_name, table_from_string_rows

MAX_SAMPLE_ROWS = 5

_DELIMITERS = ("|", "\t", ",")
_RULE_LINE = re.compile(r"^[\s|+:-]+$")


@dataclass
class DatasetProfile:
    name: str
    kind: str  # "structured" | "unstructured"
    format: str
    source: tuple[str, str]  # (connector name, locator)
    schema: Schema | None = None
    sample_rows: list[list] = field(default_factory=list)
    summary: str = ""
    row_count: int = 0
    segment_counts: dict[str, int] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "format": self.format,
            "source": list(self.source),
            "schema": self.schema.to_json() if self.schema else None,
            "sample_rows": self.sample_rows,
            "summary": self.summary,
            "row_count": self.row_count,
            "segment_counts": self.segment_counts,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "DatasetProfile":
        return cls(
            name=doc["name"],
            kind=doc["kind"],
            format=doc["format"],
            source=tuple(doc["source"]),
            schema=Schema.from_json(doc["schema"]) if doc["schema"] else None,
            sample_rows=doc["sample_rows"],
            summary=doc["summary"],
            row_count=doc["row_count"],
            segment_counts=doc.get("segment_counts", {}),
        )

    def prompt_line(self) -> str:
        """One-line rendering for planner prompts."""
        if self.kind == "structured" and self.schema is not None:
            cols = ", ".join(f"{c.name}:{c.type}" for c in self.schema.columns)
            return (
                f"- {self.name} (kind=structured, format={self.format}, "
                f"rows={self.row_count}): {cols}"
            )
        return (
            f"- {self.name} (kind=unstructured, format={self.format}, "
            f"segments={self.segment_counts.get('coarse', 0)}): {self.summary[:100]}"
        )


@dataclass
class ExtractedTable:
    name: str
    header: list[str]
    string_rows: list[list[str]]
    first_line: int


def _split_cells(line: str, delimiter: str) -> list[str]:
    if delimiter == "|":
        trimmed = line.strip()
        if trimmed.startswith("|"):
            trimmed = trimmed[1:]
        if trimmed.endswith("|"):
            trimmed = trimmed[:-1]
        return [c.strip() for c in trimmed.split("|")]
    return [c.strip() for c in line.split(delimiter)]


def detect_tables(text: str, base_name: str) -> list[ExtractedTable]:
    """Find delimiter-aligned blocks of 3+ lines and parse each as a table."""
    lines = text.splitlines()
    consumed = [False] * len(lines)
    found: list[ExtractedTable] = []
    for delimiter in _DELIMITERS:
        i = 0
        while i < len(lines):
            if consumed[i]:
                i += 1
                continue
            count = lines[i].count(delimiter)
            if count < 1 or not lines[i].strip():
                i += 1
                continue
            j = i
            while (
                j < len(lines)
                and not consumed[j]
                and lines[j].strip()
                and lines[j].count(delimiter) == count
            ):
                j += 1
            if j - i >= 3:
                block = lines[i:j]
                for kdx in range(i, j):
                    consumed[kdx] = True
                data_lines = [ln for ln in block if not _RULE_LINE.match(ln)]
                if len(data_lines) >= 2:
                    header_cells = _split_cells(data_lines[0], delimiter)
                    header = [
                        sanitize_column_name(h, idx) for idx, h in enumerate(header_cells)
                    ]
                    string_rows = [_split_cells(ln, delimiter) for ln in data_lines[1:]]
                    found.append(
                        ExtractedTable(
                            name=f"{base_name}_table_{len(found) + 1}",
                            header=header,
                            string_rows=string_rows,
                            first_line=i,
                        )
                    )
                i = j
            else:
                i += 1
    found.sort(key=lambda t: t.first_line)
    for idx, t in enumerate(found):
        t.name = f"{base_name}_table_{idx + 1}"
    return found


def extracted_to_table(extracted: ExtractedTable):
    return table_from_string_rows(extracted.header, extracted.string_rows)


def summarize_structured(
    name: str,
    schema: Schema,
    sample_rows: list[list],
    chat: ChatProvider | None,
    model: str,
    related: list[str] | None = None,
) -> tuple[str, list[str]]:
    """LLM summary with a deterministic fallback. Returns (summary, warnings)."""
    cols = ", ".join(f"{c.name} ({c.type})" for c in schema.columns)
    fallback = f"Tabular dataset {name} with columns {cols}."
    if chat is None:
        return fallback, []
    lines = [
        f"Summarize dataset '{name}' in one sentence for an analyst.",
        f"Columns: {cols}",
    ]
    if sample_rows:
        lines.append(f"First row: {sample_rows[0]}")
    for rel in related or []:
        lines.append(f"Related context: {rel[:200]}")
    try:
        response = chat.chat(ChatRequest(model=model, prompt="\n".join(lines)))
        summary = response.text.strip()
        return (summary or fallback), []
    except ProviderError as e:
        return fallback, [f"summary for '{name}' fell back to template: {e}"]


def summarize_unstructured(
    name: str, first_segment: str, chat: ChatProvider | None, model: str
) -> tuple[str, list[str]]:
    fallback = f"Text dataset {name}; free-form content with optional embedded tables."
    if chat is None:
        return fallback, []
    prompt = (
        f"Summarize dataset '{name}' in one sentence for an analyst.\n"
        f"Opening text: {first_segment[:400]}"
    )
    try:
        response = chat.chat(ChatRequest(model=model, prompt=prompt))
        summary = response.text.strip()
        return (summary or fallback), []
    except ProviderError as e:
        return fallback, [f"summary for '{name}' fell back to template: {e}"]
