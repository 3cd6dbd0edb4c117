"""Agent prompt templates and the text blocks that fill their slots.

Templates are plain files with $-named slots, loaded from a directory so
deployments can adjust wording without code changes. Rendering is strict:
a template asking for a slot the caller did not provide is a ConfigError,
never a silently empty section. The memory transcript always sits between
<<MEMORY>> and <</MEMORY>> marker lines, which the fixture store collapses
into a digest when keying recorded responses.
"""

from __future__ import annotations

import json
from pathlib import Path
from string import Template

from ..catalog import DatasetProfile
from ..errors import ConfigError

ROLES = (
    "selection",
    "sketch",
    "manipulation",
    "validator_completeness",
    "validator_guideline",
)

DEFAULT_TEMPLATE_DIR = Path(__file__).parent / "templates"


class TemplateSet:
    """Prompt templates for every agent role, loaded once from disk."""

    def __init__(self, directory: str | Path | None = None):
        self.directory = Path(directory) if directory else DEFAULT_TEMPLATE_DIR
        self._templates: dict[str, Template] = {}
        for role in ROLES:
            path = self.directory / f"{role}.txt"
            if not path.exists():
                raise ConfigError(f"prompt template not found: {path}")
            self._templates[role] = Template(path.read_text(encoding="utf-8"))

    def render(self, role: str, **slots) -> str:
        template = self._templates.get(role)
        if template is None:
            raise ConfigError(f"unknown agent role '{role}'")
        try:
            return template.substitute(**{k: str(v) for k, v in slots.items()})
        except KeyError as e:
            raise ConfigError(f"template '{role}' slot {e} was not filled") from None
        except ValueError as e:
            raise ConfigError(f"template '{role}' is malformed: {e}") from None


def profile_lines(profiles: list[DatasetProfile]) -> str:
    """One block per dataset: headline, columns or segment counts."""
    if not profiles:
        return "(none)"
    blocks: list[str] = []
    for p in profiles:
        head = f"- {p.name} (kind={p.kind}, format={p.format}, rows={p.row_count}): {p.summary}"
        lines = [head]
        if p.schema is not None:
            cols = ", ".join(f"{c.name} {c.type}" for c in p.schema.columns)
            lines.append(f"  columns: {cols}")
        if p.segment_counts:
            counts = ", ".join(f"{k}={v}" for k, v in sorted(p.segment_counts.items()))
            lines.append(f"  segments: {counts}")
        blocks.append("\n".join(lines))
    return "\n".join(blocks)


def knowledge_lines(hits: list[dict]) -> str:
    if not hits:
        return "(none)"
    return "\n".join(f"- {hit['text']}" for hit in hits)


def tool_lines(connector_descriptions: list[dict]) -> str:
    """Access methods: every connector's tools with their parameter schemas."""
    if not connector_descriptions:
        return "(none)"
    lines: list[str] = []
    for desc in connector_descriptions:
        caps = ", ".join(desc.get("capabilities", []))
        lines.append(f"- connector {desc['name']} (capabilities: {caps})")
        for tool in desc.get("tools", []):
            schema = json.dumps(tool["params_schema"], sort_keys=True)
            lines.append(f"  tool {tool['tool_name']} params {schema}")
    return "\n".join(lines)


__all__ = [
    "DEFAULT_TEMPLATE_DIR",
    "ROLES",
    "TemplateSet",
    "knowledge_lines",
    "profile_lines",
    "tool_lines",
]
