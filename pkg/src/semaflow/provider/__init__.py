"""Chat/embedding providers: mock, record, replay, and HTTP."""

from .base import ChatProvider, ChatRequest, ChatResponse, Embedder, UsageCounter, token_count
from .fixtures import (
    FixtureStore,
    RecordingChatProvider,
    ReplayChatProvider,
    fixture_key,
    normalize_prompt,
)
from .http import HttpChatProvider, HttpEmbedder
from .mock import (
    HashEmbedder,
    MockChatProvider,
    MockRule,
    contains,
    cosine,
    default_rules,
    make_mock_provider,
    similarity01,
)

__all__ = [
    "ChatProvider",
    "ChatRequest",
    "ChatResponse",
    "Embedder",
    "FixtureStore",
    "HashEmbedder",
    "HttpChatProvider",
    "HttpEmbedder",
    "MockChatProvider",
    "MockRule",
    "RecordingChatProvider",
    "ReplayChatProvider",
    "UsageCounter",
    "contains",
    "cosine",
    "default_rules",
    "fixture_key",
    "make_mock_provider",
    "normalize_prompt",
    "similarity01",
    "token_count",
]
