"""Chat-completions and embeddings HTTP backends."""

from __future__ import annotations

import httpx
import numpy as np

from ..errors import ProviderError
from .base import ChatRequest, ChatResponse, token_count


class HttpChatProvider:
    """POSTs to a chat-completions style endpoint.

    The endpoint receives {model, messages, temperature} and must answer
    with choices[0].message.content; usage fields are honored when present
    and reconstructed from text lengths otherwise.
    """

    def __init__(
        self,
        endpoint: str,
        api_key: str | None = None,
        timeout: float = 60.0,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint
        self.api_key = api_key
        self._client = client or httpx.Client(timeout=timeout)

    def chat(self, request: ChatRequest) -> ChatResponse:
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        payload = {
            "model": request.model,
            "messages": [{"role": "user", "content": request.prompt}],
            "temperature": request.temperature,
        }
        if request.max_tokens is not None:
            payload["max_tokens"] = request.max_tokens
        try:
            resp = self._client.post(self.endpoint, json=payload, headers=headers)
        except httpx.HTTPError as e:
            raise ProviderError(f"ProviderError: request failed: {e}") from e
        if resp.status_code != 200:
            raise ProviderError(
                f"ProviderError: backend returned status {resp.status_code}"
            )
        try:
            doc = resp.json()
            text = doc["choices"][0]["message"]["content"]
        except (KeyError, IndexError, ValueError) as e:
            raise ProviderError(f"ProviderError: malformed response: {e}") from e
        usage = doc.get("usage", {})
        return ChatResponse(
            text=text,
            input_tokens=usage.get("prompt_tokens", token_count(request.prompt)),
            output_tokens=usage.get("completion_tokens", token_count(text)),
        )


class HttpEmbedder:
    """POSTs to an embeddings endpoint: {model, input} -> data[i].embedding.

    Vectors are normalized to unit length client-side so downstream cosine
    math holds regardless of what the backend returns.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str | None = None,
        timeout: float = 60.0,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key
        self._client = client or httpx.Client(timeout=timeout)

    def embed(self, texts) -> np.ndarray:
        texts = list(texts)
        if not texts:
            raise ProviderError("ProviderError: embed called with no texts")
        headers = {}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        try:
            resp = self._client.post(
                self.endpoint,
                json={"model": self.model, "input": texts},
                headers=headers,
            )
        except httpx.HTTPError as e:
            raise ProviderError(f"ProviderError: embed request failed: {e}") from e
        if resp.status_code != 200:
            raise ProviderError(
                f"ProviderError: embed backend returned status {resp.status_code}"
            )
        try:
            doc = resp.json()
            vectors = np.asarray(
                [item["embedding"] for item in doc["data"]], dtype=np.float64
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ProviderError(f"ProviderError: malformed embed response: {e}") from e
        if vectors.shape[0] != len(texts):
            raise ProviderError(
                f"ProviderError: expected {len(texts)} vectors, got {vectors.shape[0]}"
            )
        norms = np.linalg.norm(vectors, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        return vectors / norms
