"""Deterministic rule-based providers for offline runs and tests.

The mock chat provider walks an ordered rule list; the first matching rule
answers. Built-in rules cover every prompt shape the engine emits, each as
a pure function of the prompt text, so identical inputs always produce
identical responses regardless of process, position in a plan, or model.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..errors import ProviderError
from .base import ChatRequest, ChatResponse, token_count

_WORD_RE = re.compile(r"[a-z0-9]+")


class HashEmbedder:
    """Content-hash embeddings: deterministic, unit-norm, 64-dimensional.

    Each lowercase word token maps to a fixed pseudo-random direction
    (bytes of its blake2b digest); a text embeds as the normalized
    term-frequency-weighted sum. Shared vocabulary yields high cosine.
    """

    def __init__(self, dim: int = 64):
        if not 1 <= dim <= 64:
            raise ValueError("hash embedder supports dimensions 1..64")
        self.dim = dim
        self._token_cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._token_cache.get(token)
        if vec is None:
            digest = hashlib.blake2b(token.encode("utf-8"), digest_size=self.dim).digest()
            vec = (np.frombuffer(digest, dtype=np.uint8).astype(np.float64) - 127.5) / 127.5
            norm = np.linalg.norm(vec)
            vec = vec / norm if norm > 0 else vec
            self._token_cache[token] = vec
        return vec

    def embed_one(self, text: str) -> np.ndarray:
        tokens = _WORD_RE.findall(text.lower())
        if not tokens:
            out = np.zeros(self.dim)
            out[0] = 1.0
            return out
        acc = np.zeros(self.dim)
        for t in tokens:
            acc += self._token_vector(t)
        norm = np.linalg.norm(acc)
        if norm == 0:
            acc[0] = 1.0
            return acc
        return acc / norm

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        return np.stack([self.embed_one(t) for t in texts])


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = float(np.linalg.norm(a)), float(np.linalg.norm(b))
    if na == 0 or nb == 0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


def similarity01(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine rescaled to [0, 1]; semantic-execution thresholds use this."""
    return (cosine(a, b) + 1.0) / 2.0


@dataclass
class MockRule:
    name: str
    match: Callable[[str, str], bool]
    respond: Callable[[str, str], str]


def contains(needle: str) -> Callable[[str, str], bool]:
    return lambda model, prompt: needle in prompt


class MockChatProvider:
    """Ordered-rule canned chat. Raises ProviderError when nothing matches."""

    def __init__(self, rules: list[MockRule] | None = None, fail_unmatched: bool = True):
        self.rules: list[MockRule] = list(rules or [])
        self.fail_unmatched = fail_unmatched
        self.call_log: list[tuple[str, str]] = []

    def add_rule(self, name: str, match, respond, front: bool = False):
        if isinstance(match, str):
            match = contains(match)
        if isinstance(respond, str):
            text = respond
            respond = lambda model, prompt: text  # noqa: E731
        rule = MockRule(name, match, respond)
        if front:
            self.rules.insert(0, rule)
        else:
            self.rules.append(rule)

    def chat(self, request: ChatRequest) -> ChatResponse:
        self.call_log.append((request.model, request.prompt))
        for rule in self.rules:
            if rule.match(request.model, request.prompt):
                text = rule.respond(request.model, request.prompt)
                return ChatResponse(
                    text=text,
                    input_tokens=token_count(request.prompt),
                    output_tokens=token_count(text),
                )
        if self.fail_unmatched:
            raise ProviderError(
                f"ProviderError: no mock rule matched the prompt "
                f"(model {request.model}, first line "
                f"{request.prompt.splitlines()[0][:60]!r})"
            )
        return ChatResponse("", token_count(request.prompt), 0)


def _digest(text: str) -> bytes:
    return hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()


def _section(prompt: str, header: str) -> str:
    """Text between a ``HEADER:`` line and the next all-caps header or blank."""
    lines = prompt.splitlines()
    out: list[str] = []
    grab = False
    for line in lines:
        if line.startswith(header):
            grab = True
            rest = line[len(header):].strip()
            if rest:
                out.append(rest)
            continue
        if grab:
            if re.match(r"^[A-Z][A-Z _-]*:", line) or line.startswith("Answer ") or line.startswith("Respond "):
                break
            out.append(line)
    return "\n".join(out).strip()


def mock_filter_verdict(condition: str, values: str) -> str:
    return "yes" if _digest(f"sf|{condition}|{values}")[0] % 2 == 0 else "no"


def mock_extract_value(instruction: str, target: str, source_value: str) -> str:
    return _digest(f"se|{instruction}|{target}|{source_value}").hex()[:8]


def mock_group_label(topic: str, values: str, max_labels: int) -> str:
    idx = int.from_bytes(_digest(f"sg|{topic}|{values}"), "big") % max(1, max_labels)
    return f"g{idx}"


def mock_join_verdict(criterion: str, left: str, right: str) -> str:
    return "yes" if _digest(f"sj|{criterion}|{left}|{right}")[0] % 4 == 0 else "no"


def _respond_filter(model: str, prompt: str) -> str:
    condition = _section(prompt, "Condition:")
    values = _section(prompt, "VALUES:")
    return mock_filter_verdict(condition, values)


def _respond_extract(model: str, prompt: str) -> str:
    instruction = _section(prompt, "Instruction:")
    targets_block = _section(prompt, "TARGETS:")
    lines = []
    if "<-" in targets_block:
        for line in targets_block.splitlines():
            if "<-" not in line:
                continue
            target, _, source = line.partition("<-")
            _, _, value = source.partition("=")
            lines.append(
                f"{target.strip()}: {mock_extract_value(instruction, target.strip(), value)}"
            )
    else:
        targets = [t.strip() for t in targets_block.splitlines()[0].split(",")] if targets_block else []
        values = _section(prompt, "VALUES:")
        for target in targets:
            lines.append(f"{target}: {mock_extract_value(instruction, target, values)}")
    return "\n".join(lines)


def _respond_group(model: str, prompt: str) -> str:
    topic = _section(prompt, "Topic:")
    values = _section(prompt, "VALUES:")
    m = re.search(r"at most (\d+) distinct labels", prompt)
    max_labels = int(m.group(1)) if m else 8
    return mock_group_label(topic, values, max_labels)


def _respond_join(model: str, prompt: str) -> str:
    criterion = _section(prompt, "Criterion:")
    left = _section(prompt, "LEFT:")
    right = _section(prompt, "RIGHT:")
    return mock_join_verdict(criterion, left, right)


def _respond_selection(model: str, prompt: str) -> str:
    names = re.findall(r"^- (\w[\w.-]*) \(", prompt, flags=re.MULTILINE)
    return json.dumps(names[:3])


def _respond_plan(model: str, prompt: str) -> str:
    m = re.search(r"^- (\w[\w.-]*) \(kind=structured, format=(\w+)", prompt, flags=re.MULTILINE)
    if not m:
        m2 = re.search(r"^- (\w[\w.-]*) \(", prompt, flags=re.MULTILINE)
        if not m2:
            raise ProviderError("ProviderError: no dataset profile in the prompt")
        name, fmt = m2.group(1), "csv"
    else:
        name, fmt = m.group(1), m.group(2)
    plan = {
        "version": 1,
        "root": {
            "id": 2,
            "op": "Limit",
            "attrs": {"k": 20},
            "children": [
                {
                    "id": 1,
                    "op": "FileScan",
                    "attrs": {"dataset": name, "format": fmt},
                    "children": [],
                }
            ],
        },
    }
    return json.dumps(plan)


def _respond_classify(model: str, prompt: str) -> str:
    lowered = prompt.lower()
    if any(w in lowered for w in ("column", "operator", "syntax", "arity", "type")):
        return "grammar"
    if any(w in lowered for w in ("dataset", "connector", "provider", "file", "fixture")):
        return "data"
    return "semantic"


def _respond_summary(model: str, prompt: str) -> str:
    m = re.search(r"Summarize dataset '([^']+)'", prompt)
    name = m.group(1) if m else "dataset"
    cols = re.search(r"Columns: ([^\n]+)", prompt)
    if cols:
        return f"Tabular dataset {name} with columns {cols.group(1)}."
    return f"Text dataset {name}; free-form content with optional embedded tables."


def _respond_segments(model: str, prompt: str) -> str:
    numbers = re.findall(r"^\[(\d+)\]", prompt, flags=re.MULTILINE)
    return "\n".join(numbers)


def _respond_lesson(model: str, prompt: str) -> str:
    # function-level import: the memory package imports providers at top level
    from ..memory.records import template_summary

    m = re.search(r"These recurring (\w+) errors", prompt)
    category = m.group(1) if m else "semantic"
    messages = [line[2:] for line in prompt.splitlines() if line.startswith("- ")]
    if not messages:
        messages = [""]
    return template_summary(category, messages)


def _respond_sketch(model: str, prompt: str) -> str:
    return (
        "1. Scan the selected datasets.\n"
        "2. Filter and join rows relevant to the question.\n"
        "3. Aggregate or extract the requested values.\n"
        "4. Sort and limit the output."
    )


def default_rules() -> list[MockRule]:
    """Rules for every built-in prompt shape, most specific first."""
    return [
        MockRule("validator", contains("Respond with APPROVE"), lambda m, p: "APPROVE"),
        MockRule("classify", contains("Classify the error message"), _respond_classify),
        MockRule("lesson", contains("State in one sentence the lesson"), _respond_lesson),
        MockRule("summary", contains("Summarize dataset"), _respond_summary),
        MockRule("segments", contains("PARAGRAPHS:"), _respond_segments),
        MockRule("selection", contains("Respond with a JSON array of dataset names"), _respond_selection),
        MockRule("manipulation", contains("Respond with the plan JSON only"), _respond_plan),
        MockRule("sketch", contains("Describe the solution steps"), _respond_sketch),
        MockRule("sem_filter", contains("Decide whether the row satisfies the condition."), _respond_filter),
        MockRule("sem_extract", contains("Extract the requested fields from the row."), _respond_extract),
        MockRule("sem_group", contains("Assign one short label to the row"), _respond_group),
        MockRule("sem_join", contains("Decide whether the two rows match."), _respond_join),
    ]


def make_mock_provider() -> MockChatProvider:
    return MockChatProvider(default_rules())
