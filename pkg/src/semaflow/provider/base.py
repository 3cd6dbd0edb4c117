"""Chat and embedding provider contracts.

Usage accounting is uniform everywhere: a token is ceil(chars / 4). The
mock provider computes usage that way, and cost accounting reuses the same
rule, so estimated and incurred cost agree under pinned parameters.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np


def token_count(text: str) -> int:
    return math.ceil(len(text) / 4)


@dataclass(frozen=True)
class ChatRequest:
    model: str
    prompt: str
    temperature: float = 0.0
    max_tokens: int | None = None


@dataclass(frozen=True)
class ChatResponse:
    text: str
    input_tokens: int
    output_tokens: int


class ChatProvider(Protocol):
    def chat(self, request: ChatRequest) -> ChatResponse: ...


class Embedder(Protocol):
    dim: int

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


@dataclass
class UsageCounter:
    """Mutable tally a caller can thread through provider calls."""

    calls: int = 0
    input_tokens: int = 0
    output_tokens: int = 0
    by_model: dict[str, int] = field(default_factory=dict)

    def add(self, model: str, response: ChatResponse):
        self.calls += 1
        self.input_tokens += response.input_tokens
        self.output_tokens += response.output_tokens
        self.by_model[model] = self.by_model.get(model, 0) + 1
