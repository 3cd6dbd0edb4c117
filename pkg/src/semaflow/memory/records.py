"""Memory record shapes and the error-classification dictionary.

Errors fall into three categories, each feeding one agent on later
iterations: data errors go to the profiling agent, semantic errors to the
planning agent, grammar errors to the manipulation agent.

The dictionary is an ordered list of (substring, category) pairs matched
case-insensitively, first match wins. It covers every built-in error
string; only novel messages fall through to a model call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DATA = "data"
SEMANTIC = "semantic"
GRAMMAR = "grammar"

CATEGORIES = (DATA, SEMANTIC, GRAMMAR)

# category -> agent that should see the record
AGENT_FOR_CATEGORY = {
    DATA: "profiling",
    SEMANTIC: "planning",
    GRAMMAR: "manipulation",
}

AGENT_ROLES = ("profiling", "planning", "manipulation")

# Ordered: specific prefixes first. Matching lowercases both sides.
ERROR_DICTIONARY: tuple[tuple[str, str], ...] = (
    ("recurring data error", DATA),
    ("recurring semantic error", SEMANTIC),
    ("recurring grammar error", GRAMMAR),
    ("unknowncolumn", GRAMMAR),
    ("unknown column", GRAMMAR),
    ("no such column", GRAMMAR),
    ("arityerror", GRAMMAR),
    ("decodeerror", GRAMMAR),
    ("unknownoperator", GRAMMAR),
    ("unknown operator", GRAMMAR),
    ("typemismatch", GRAMMAR),
    ("operand types", GRAMMAR),
    ("duplicatecolumn", GRAMMAR),
    ("duplicate column", GRAMMAR),
    ("syntax error", GRAMMAR),
    ("script operator", GRAMMAR),
    ("division by zero", GRAMMAR),
    ("union inputs disagree", GRAMMAR),
    ("unknowndataset", DATA),
    ("unknown dataset", DATA),
    ("no such table", DATA),
    ("emptydataset", DATA),
    ("empty dataset", DATA),
    ("connectorerror", DATA),
    ("connector", DATA),
    ("dimensionmismatch", DATA),
    ("dimension", DATA),
    ("unknownfixture", DATA),
    ("no fixture", DATA),
    ("providererror", DATA),
    ("provider error", DATA),
    ("nocandidate", DATA),
    ("no candidate", DATA),
    ("rejected by validators", SEMANTIC),
    ("does not address", SEMANTIC),
    ("correction", SEMANTIC),
)


def dictionary_lookup(message: str) -> str | None:
    lowered = message.lower()
    for needle, category in ERROR_DICTIONARY:
        if needle in lowered:
            return category
    return None


def common_prefix(messages: list[str]) -> str:
    first = min(messages)
    last = max(messages)
    out = []
    for a, b in zip(first, last):
        if a != b:
            break
        out.append(a)
    return "".join(out)


def template_summary(category: str, messages: list[str]) -> str:
    """Deterministic lesson text for a promoted cluster.

    Starts with "Recurring <category> error" so the dictionary re-derives
    the category from the text alone at retrieval time.
    """
    prefix = common_prefix(messages).strip().rstrip(".,;:'\" ")
    if len(prefix) < 8:  # messages diverge immediately; fall back to the first
        prefix = messages[0][:80]
    return f"Recurring {category} error: {prefix}"


@dataclass(frozen=True)
class ShortTermRecord:
    task_id: str
    seq: int
    iteration: int
    category: str
    message: str
    node_id: int | None = None


@dataclass(frozen=True)
class LongTermRecord:
    """Exactly the promoted triple: task text, its embedding, the lesson."""

    task: str
    task_embedding: np.ndarray
    memory: str
