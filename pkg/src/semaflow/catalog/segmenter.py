"""Hierarchical text segmentation.

Two granularities over the same document: coarse segments are paragraph
groups of at most 2000 characters, fine segments are sentence groups of at
most 400. Both are lossless partitions: concatenating the segments in
order reproduces the document byte for byte.

The default splitter is rule-based. llm mode asks a model where coherent
segments start and packs accordingly; any provider failure or unparseable
answer falls back to the rules and reports a warning.
"""

from __future__ import annotations

import re

from ..errors import ProviderError
from ..provider.base import ChatProvider, ChatRequest

COARSE_MAX_CHARS = 2000
FINE_MAX_CHARS = 400

_PARAGRAPH_SPLIT = re.compile(r"(?<=\n\n)")
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])(?=\s)")


def _pieces(text: str, pattern: re.Pattern) -> list[str]:
    return [p for p in pattern.split(text) if p]


def _hard_chunks(piece: str, max_chars: int) -> list[str]:
    return [piece[i : i + max_chars] for i in range(0, len(piece), max_chars)]


def _pack(pieces: list[str], max_chars: int) -> list[str]:
    """Greedy packing preserving order; oversize pieces get hard-sliced."""
    out: list[str] = []
    acc = ""
    for piece in pieces:
        if len(piece) > max_chars:
            if acc:
                out.append(acc)
                acc = ""
            chunks = _hard_chunks(piece, max_chars)
            out.extend(chunks[:-1])
            acc = chunks[-1]
            continue
        if acc and len(acc) + len(piece) > max_chars:
            out.append(acc)
            acc = piece
        else:
            acc += piece
    if acc:
        out.append(acc)
    return out


def _rule_segments(text: str, max_chars: int, splitter: re.Pattern) -> list[str]:
    pieces: list[str] = []
    for paragraph in _pieces(text, _PARAGRAPH_SPLIT):
        if splitter is _PARAGRAPH_SPLIT or len(paragraph) <= max_chars:
            pieces.append(paragraph)
        else:
            pieces.extend(_pieces(paragraph, splitter))
    return _pack(pieces, max_chars)


def segment_text(
    text: str,
    level: str,
    mode: str = "rule",
    chat: ChatProvider | None = None,
    model: str = "default",
) -> tuple[list[str], list[str]]:
    """Segment a document. Returns (segments, warnings)."""
    if level == "coarse":
        max_chars, splitter = COARSE_MAX_CHARS, _PARAGRAPH_SPLIT
    elif level == "fine":
        max_chars, splitter = FINE_MAX_CHARS, _SENTENCE_SPLIT
    else:
        raise ValueError(f"unknown segmentation level '{level}'")
    if not text:
        return [], []
    if mode == "rule" or chat is None:
        return _rule_segments(text, max_chars, splitter), []
    if mode != "llm":
        raise ValueError(f"unknown segmentation mode '{mode}'")

    paragraphs = _pieces(text, _PARAGRAPH_SPLIT)
    prompt_lines = ["Split the document into coherent segments.", "PARAGRAPHS:"]
    for i, p in enumerate(paragraphs, start=1):
        preview = " ".join(p.split())[:80]
        prompt_lines.append(f"[{i}] {preview}")
    prompt_lines.append(
        "Respond with the indices of paragraphs that start a new segment, one per line."
    )
    try:
        response = chat.chat(
            ChatRequest(model=model, prompt="\n".join(prompt_lines), temperature=0.0)
        )
        starts = sorted({int(m) for m in re.findall(r"\d+", response.text)})
        starts = [s for s in starts if 1 <= s <= len(paragraphs)]
        if not starts or starts[0] != 1:
            starts = [1] + starts
    except ProviderError as e:
        return (
            _rule_segments(text, max_chars, splitter),
            [f"segmentation fell back to rule mode: {e}"],
        )
    except ValueError:
        return (
            _rule_segments(text, max_chars, splitter),
            ["segmentation fell back to rule mode: unparseable boundary list"],
        )

    segments: list[str] = []
    bounds = starts + [len(paragraphs) + 1]
    for a, b in zip(bounds, bounds[1:]):
        group = "".join(paragraphs[a - 1 : b - 1])
        if not group:
            continue
        pieces = [group] if len(group) <= max_chars else _pieces(group, splitter)
        segments.extend(_pack(pieces, max_chars))
    return segments, []
