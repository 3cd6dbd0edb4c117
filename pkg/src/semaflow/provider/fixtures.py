"""Record/replay fixture store for chat calls.

A fixture key is a hash of (model name, normalized prompt). Normalization
strips trailing whitespace per line and collapses the memory-transcript
block between <<MEMORY>> and <</MEMORY>> markers into a digest of its
content: cosmetic edits elsewhere do not invalidate a store, while any
change to what the model actually sees (including different memory) maps
to a different key.

One JSON document per key in the fixtures directory.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from ..errors import ProviderError, UnknownFixture
from .base import ChatProvider, ChatRequest, ChatResponse

MEMORY_OPEN = "<<MEMORY>>"
MEMORY_CLOSE = "<</MEMORY>>"


def normalize_prompt(prompt: str) -> str:
    lines = [line.rstrip() for line in prompt.splitlines()]
    out: list[str] = []
    buffer: list[str] | None = None
    for line in lines:
        if line == MEMORY_OPEN and buffer is None:
            buffer = []
            continue
        if line == MEMORY_CLOSE and buffer is not None:
            digest = hashlib.sha256("\n".join(buffer).encode("utf-8")).hexdigest()[:16]
            out.append(f"{MEMORY_OPEN}digest={digest}{MEMORY_CLOSE}")
            buffer = None
            continue
        if buffer is not None:
            buffer.append(line)
        else:
            out.append(line)
    if buffer is not None:  # unbalanced marker; keep the raw lines
        out.append(MEMORY_OPEN)
        out.extend(buffer)
    return "\n".join(out)


def fixture_key(model: str, prompt: str) -> str:
    body = f"{model}\n{normalize_prompt(prompt)}"
    return hashlib.sha256(body.encode("utf-8")).hexdigest()[:32]


class FixtureStore:
    def __init__(self, directory: str | Path):
        self.directory = Path(directory)

    def _path(self, key: str) -> Path:
        return self.directory / f"{key}.json"

    def get(self, model: str, prompt: str) -> ChatResponse | None:
        path = self._path(fixture_key(model, prompt))
        if not path.exists():
            return None
        doc = json.loads(path.read_text(encoding="utf-8"))
        return ChatResponse(
            text=doc["response"],
            input_tokens=doc["input_tokens"],
            output_tokens=doc["output_tokens"],
        )

    def put(self, model: str, prompt: str, response: ChatResponse) -> str:
        key = fixture_key(model, prompt)
        self.directory.mkdir(parents=True, exist_ok=True)
        doc = {
            "model": model,
            "prompt": prompt,
            "response": response.text,
            "input_tokens": response.input_tokens,
            "output_tokens": response.output_tokens,
        }
        self._path(key).write_text(
            json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        return key

    def keys(self) -> list[str]:
        if not self.directory.exists():
            return []
        return sorted(p.stem for p in self.directory.glob("*.json"))

    def verify(self) -> list[str]:
        """Consistency problems: unreadable documents or key/content drift."""
        problems: list[str] = []
        for path in sorted(self.directory.glob("*.json")) if self.directory.exists() else []:
            try:
                doc = json.loads(path.read_text(encoding="utf-8"))
                expected = fixture_key(doc["model"], doc["prompt"])
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                problems.append(f"{path.name}: unreadable fixture ({e})")
                continue
            if expected != path.stem:
                problems.append(
                    f"{path.name}: stored prompt hashes to {expected}, not {path.stem}"
                )
        return problems


class ReplayChatProvider:
    """Serve recorded responses. Strict mode fails on unknown prompts."""

    def __init__(
        self,
        store: FixtureStore,
        strict: bool = True,
        fallback: ChatProvider | None = None,
    ):
        self.store = store
        self.strict = strict
        self.fallback = fallback

    def chat(self, request: ChatRequest) -> ChatResponse:
        found = self.store.get(request.model, request.prompt)
        if found is not None:
            return found
        if self.strict or self.fallback is None:
            raise UnknownFixture(fixture_key(request.model, request.prompt), request.model)
        return self.fallback.chat(request)


class RecordingChatProvider:
    """Pass through to an inner provider and persist every exchange."""

    def __init__(self, inner: ChatProvider, store: FixtureStore):
        self.inner = inner
        self.store = store
        self.recorded: list[str] = []

    def chat(self, request: ChatRequest) -> ChatResponse:
        response = self.inner.chat(request)
        self.recorded.append(self.store.put(request.model, request.prompt, response))
        return response


def provider_error(message: str) -> ProviderError:
    return ProviderError(f"ProviderError: {message}")
