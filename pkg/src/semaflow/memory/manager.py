"""Execution memory: short-term records, expiry, promotion, retrieval.

Short-term records append per task, capped at 50; overflow expires oldest
first into a temporary buffer. promote() clusters the buffer by (category,
embedding similarity >= 0.85): clusters of two or more become one
long-term record each, singletons are discarded, and the buffer clears.
Long-term records live in the same embedded vector table engine as the
catalog, in a collection named "memory".

Everything is persisted; reopening the same path sees the same state.
"""

from __future__ import annotations

import sqlite3
import threading
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ProviderError
from ..provider.base import ChatProvider, ChatRequest, Embedder
from ..provider.mock import cosine
from .records import (
    AGENT_FOR_CATEGORY,
    AGENT_ROLES,
    CATEGORIES,
    LongTermRecord,
    SEMANTIC,
    ShortTermRecord,
    dictionary_lookup,
    template_summary,
)

SHORT_TERM_CAP = 50
PROMOTE_SIMILARITY = 0.85
LONG_TERM_TOP_K = 5
MEMORY_COLLECTION = "memory"


@dataclass
class MemoryViews:
    """What each agent sees for one task, long-term first then recency."""

    profiling: list[str] = field(default_factory=list)
    planning: list[str] = field(default_factory=list)
    manipulation: list[str] = field(default_factory=list)

    def for_role(self, role: str) -> list[str]:
        return getattr(self, role)


class MemoryManager:
    def __init__(
        self,
        path: str | Path,
        embedder: Embedder,
        chat: ChatProvider | None = None,
        agent_model: str = "default",
    ):
        from ..catalog.vectors import VectorStore  # same engine as the catalog

        self.path = Path(path)
        self.path.mkdir(parents=True, exist_ok=True)
        self.embedder = embedder
        self.chat = chat
        self.agent_model = agent_model
        self.vectors = VectorStore(self.path / "memory.db")
        self._conn = sqlite3.connect(str(self.path / "memory.db"), check_same_thread=False)
        self._lock = threading.Lock()
        with self._lock:
            self._conn.execute(
                "CREATE TABLE IF NOT EXISTS short_term ("
                " seq INTEGER PRIMARY KEY AUTOINCREMENT,"
                " task_id TEXT NOT NULL,"
                " iteration INTEGER NOT NULL,"
                " category TEXT NOT NULL,"
                " message TEXT NOT NULL,"
                " node_id INTEGER,"
                " expired INTEGER NOT NULL DEFAULT 0)"
            )
            self._conn.execute(
                "CREATE TABLE IF NOT EXISTS tasks ("
                " task_id TEXT PRIMARY KEY, query TEXT NOT NULL)"
            )
            self._conn.commit()

    # -- classification ------------------------------------------------------

    def classify_error(self, message: str, use_model: bool = True) -> str:
        """Dictionary first; model fallback; 'semantic' when neither decides."""
        hit = dictionary_lookup(message)
        if hit is not None:
            return hit
        if use_model and self.chat is not None:
            prompt = (
                "Classify the error message into one of: data, semantic, grammar.\n"
                f"Message: {message}\n"
                "Respond with the single category word."
            )
            try:
                response = self.chat.chat(
                    ChatRequest(model=self.agent_model, prompt=prompt)
                )
                word = response.text.strip().split()[0].lower() if response.text.strip() else ""
                if word in CATEGORIES:
                    return word
            except ProviderError:
                pass
        return SEMANTIC

    # -- recording --------------------------------------------------------------

    def register_task(self, task_id: str, query: str):
        with self._lock:
            self._conn.execute(
                "INSERT OR REPLACE INTO tasks (task_id, query) VALUES (?, ?)",
                (task_id, query),
            )
            self._conn.commit()

    def task_query(self, task_id: str) -> str:
        row = self._conn.execute(
            "SELECT query FROM tasks WHERE task_id = ?", (task_id,)
        ).fetchone()
        return row[0] if row else task_id

    def record(
        self,
        task_id: str,
        iteration: int,
        message: str,
        node_id: int | None = None,
        category: str | None = None,
    ) -> ShortTermRecord:
        if category is None:
            category = self.classify_error(message)
        with self._lock:
            cur = self._conn.execute(
                "INSERT INTO short_term (task_id, iteration, category, message, node_id)"
                " VALUES (?, ?, ?, ?, ?)",
                (task_id, iteration, category, message, node_id),
            )
            seq = cur.lastrowid
            active = self._conn.execute(
                "SELECT COUNT(*) FROM short_term WHERE task_id = ? AND expired = 0",
                (task_id,),
            ).fetchone()[0]
            if active > SHORT_TERM_CAP:  # expire oldest into the buffer
                overflow = active - SHORT_TERM_CAP
                self._conn.execute(
                    "UPDATE short_term SET expired = 1 WHERE seq IN ("
                    " SELECT seq FROM short_term WHERE task_id = ? AND expired = 0"
                    " ORDER BY seq ASC LIMIT ?)",
                    (task_id, overflow),
                )
            self._conn.commit()
        return ShortTermRecord(
            task_id=task_id,
            seq=seq,
            iteration=iteration,
            category=category,
            message=message,
            node_id=node_id,
        )

    def active_records(self, task_id: str) -> list[ShortTermRecord]:
        cur = self._conn.execute(
            "SELECT task_id, seq, iteration, category, message, node_id FROM short_term"
            " WHERE task_id = ? AND expired = 0 ORDER BY seq ASC",
            (task_id,),
        )
        return [ShortTermRecord(*row) for row in cur.fetchall()]

    def buffer_records(self) -> list[ShortTermRecord]:
        cur = self._conn.execute(
            "SELECT task_id, seq, iteration, category, message, node_id FROM short_term"
            " WHERE expired = 1 ORDER BY seq ASC"
        )
        return [ShortTermRecord(*row) for row in cur.fetchall()]

    def record_count(self, task_id: str) -> int:
        """Total ever recorded for the task (monotone across iterations)."""
        return self._conn.execute(
            "SELECT COUNT(*) FROM short_term WHERE task_id = ?", (task_id,)
        ).fetchone()[0]

    def expire_task(self, task_id: str):
        """Move every active record of a finished task into the buffer."""
        with self._lock:
            self._conn.execute(
                "UPDATE short_term SET expired = 1 WHERE task_id = ? AND expired = 0",
                (task_id,),
            )
            self._conn.commit()

    # -- promotion ----------------------------------------------------------------

    def _summarize_cluster(self, category: str, messages: list[str]) -> str:
        if self.chat is None:
            return template_summary(category, messages)
        prompt = (
            f"These recurring {category} errors were collected while answering "
            "data questions. State in one sentence the lesson that avoids them.\n"
            + "\n".join(f"- {m}" for m in messages)
            + "\nRespond with the lesson only."
        )
        response = self.chat.chat(ChatRequest(model=self.agent_model, prompt=prompt))
        text = response.text.strip()
        return text if text else template_summary(category, messages)

    def promote(self) -> list[LongTermRecord]:
        """Cluster the expired buffer, keep groups of 2+, clear the buffer."""
        buffer = self.buffer_records()
        if not buffer:
            return []
        vecs = self.embedder.embed([r.message for r in buffer])
        clusters: list[dict] = []
        for record, vec in zip(buffer, vecs):
            placed = False
            for cluster in clusters:
                if cluster["category"] != record.category:
                    continue
                if cosine(cluster["vec"], vec) >= PROMOTE_SIMILARITY:
                    cluster["records"].append(record)
                    placed = True
                    break
            if not placed:
                clusters.append({"category": record.category, "vec": vec, "records": [record]})

        groups = [c for c in clusters if len(c["records"]) >= 2]  # singletons are noise
        try:
            summaries = [
                self._summarize_cluster(c["category"], [r.message for r in c["records"]])
                for c in groups
            ]
        except ProviderError:
            return []  # buffer kept intact; retry at the next cycle

        promoted: list[LongTermRecord] = []
        base = self.vectors.count(MEMORY_COLLECTION)
        for cluster, memory_text in zip(groups, summaries):
            task_ids = [r.task_id for r in cluster["records"]]
            task_id = max(set(task_ids), key=task_ids.count)
            task = self.task_query(task_id)
            task_vec = self.embedder.embed([task])[0]
            self.vectors.upsert(
                MEMORY_COLLECTION,
                key=f"lt{base + len(promoted):06d}",
                vector=task_vec,
                text=memory_text,
                meta={"task": task},
            )
            promoted.append(
                LongTermRecord(task=task, task_embedding=task_vec, memory=memory_text)
            )
        with self._lock:
            self._conn.execute("DELETE FROM short_term WHERE expired = 1")
            self._conn.commit()
        return promoted

    def long_term_records(self) -> list[LongTermRecord]:
        return [
            LongTermRecord(
                task=e["meta"]["task"], task_embedding=e["vector"], memory=e["text"]
            )
            for e in self.vectors.entries(MEMORY_COLLECTION)
        ]

    # -- retrieval -------------------------------------------------------------------

    def retrieve(self, task_id: str, query: str) -> MemoryViews:
        """Agent-facing views: top-k long-term by task similarity, then the
        task's own short-term records in recency order, each routed by
        category."""
        views = MemoryViews()
        if self.vectors.count(MEMORY_COLLECTION) > 0:
            qvec = self.embedder.embed([query])[0]
            for hit in self.vectors.search(
                MEMORY_COLLECTION, query_vector=qvec, k=LONG_TERM_TOP_K
            ):
                category = self.classify_error(hit["text"], use_model=False)
                views.for_role(AGENT_FOR_CATEGORY[category]).append(hit["text"])
        for record in self.active_records(task_id):
            views.for_role(AGENT_FOR_CATEGORY[record.category]).append(record.message)
        return views

    def transcript(self, views: MemoryViews, role: str) -> str:
        lines = views.for_role(role)
        if not lines:
            return "(none)"
        return "\n".join(f"- {line}" for line in lines)


__all__ = [
    "MEMORY_COLLECTION",
    "LONG_TERM_TOP_K",
    "MemoryManager",
    "MemoryViews",
    "PROMOTE_SIMILARITY",
    "SHORT_TERM_CAP",
    "AGENT_ROLES",
]
