"""Embedded persistent vector table with exact top-k search.

One sqlite file holds any number of named collections. Rows carry a dense
unit vector, the original text, a sparse term-frequency bag, and a small
JSON meta object. Search is an exact scan: scores are dense cosine, sparse
cosine over term bags, or their maximum (hybrid). Ties break by key.
"""

from __future__ import annotations

import json
import re
import sqlite3
import threading
from pathlib import Path

import numpy as np

from ..errors import DimensionMismatch

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def term_bag(text: str) -> dict[str, int]:
    bag: dict[str, int] = {}
    for token in _TOKEN_RE.findall(text.lower()):
        bag[token] = bag.get(token, 0) + 1
    return bag


def sparse_cosine(a: dict[str, int], b: dict[str, int]) -> float:
    if not a or not b:
        return 0.0
    dot = sum(w * b[t] for t, w in a.items() if t in b)
    if dot == 0:
        return 0.0
    na = sum(w * w for w in a.values()) ** 0.5
    nb = sum(w * w for w in b.values()) ** 0.5
    return dot / (na * nb)


class VectorStore:
    def __init__(self, db_path: str | Path):
        self.db_path = Path(db_path)
        self.db_path.parent.mkdir(parents=True, exist_ok=True)
        self._conn = sqlite3.connect(str(self.db_path), check_same_thread=False)
        self._lock = threading.Lock()
        with self._lock:
            self._conn.execute(
                "CREATE TABLE IF NOT EXISTS vectors ("
                " collection TEXT NOT NULL,"
                " key TEXT NOT NULL,"
                " text TEXT NOT NULL,"
                " vec BLOB NOT NULL,"
                " terms TEXT NOT NULL,"
                " meta TEXT NOT NULL,"
                " PRIMARY KEY (collection, key))"
            )
            self._conn.execute(
                "CREATE TABLE IF NOT EXISTS collection_dims ("
                " collection TEXT PRIMARY KEY, dim INTEGER NOT NULL)"
            )
            self._conn.commit()

    def close(self):
        self._conn.close()

    def _check_dim(self, collection: str, dim: int, write: bool):
        row = self._conn.execute(
            "SELECT dim FROM collection_dims WHERE collection = ?", (collection,)
        ).fetchone()
        if row is None:
            if write:
                self._conn.execute(
                    "INSERT INTO collection_dims (collection, dim) VALUES (?, ?)",
                    (collection, dim),
                )
            return
        if row[0] != dim:
            raise DimensionMismatch(row[0], dim)

    def upsert(self, collection: str, key: str, vector, text: str, meta: dict | None = None):
        vec = np.asarray(vector, dtype=np.float64)
        with self._lock:
            self._check_dim(collection, vec.shape[0], write=True)
            self._conn.execute(
                "INSERT OR REPLACE INTO vectors (collection, key, text, vec, terms, meta)"
                " VALUES (?, ?, ?, ?, ?, ?)",
                (
                    collection,
                    key,
                    text,
                    vec.tobytes(),
                    json.dumps(term_bag(text), sort_keys=True),
                    json.dumps(meta or {}, sort_keys=True),
                ),
            )
            self._conn.commit()

    def delete_where(self, collection: str, **meta_filter):
        rows = self._rows(collection)
        with self._lock:
            for key, _, _, _, meta in rows:
                if all(meta.get(k) == v for k, v in meta_filter.items()):
                    self._conn.execute(
                        "DELETE FROM vectors WHERE collection = ? AND key = ?",
                        (collection, key),
                    )
            self._conn.commit()

    def count(self, collection: str) -> int:
        row = self._conn.execute(
            "SELECT COUNT(*) FROM vectors WHERE collection = ?", (collection,)
        ).fetchone()
        return row[0]

    def _rows(self, collection: str):
        cur = self._conn.execute(
            "SELECT key, text, vec, terms, meta FROM vectors WHERE collection = ?"
            " ORDER BY key",
            (collection,),
        )
        out = []
        for key, text, blob, terms, meta in cur.fetchall():
            out.append(
                (
                    key,
                    text,
                    np.frombuffer(blob, dtype=np.float64),
                    json.loads(terms),
                    json.loads(meta),
                )
            )
        return out

    def entries(self, collection: str, **meta_filter):
        return [
            {"key": k, "text": t, "vector": v, "meta": m}
            for k, t, v, _, m in self._rows(collection)
            if all(m.get(mk) == mv for mk, mv in meta_filter.items())
        ]

    def search(
        self,
        collection: str,
        query_vector=None,
        query_text: str | None = None,
        k: int = 5,
        scoring: str = "dense",
        **meta_filter,
    ) -> list[dict]:
        """Exact top-k. Returns dicts with key, text, meta, score.

        dense needs query_vector; sparse needs query_text; hybrid needs both
        and scores max(dense, sparse). k must be >= 1.
        """
        if k < 1:
            raise ValueError("k must be >= 1")
        if scoring not in ("dense", "sparse", "hybrid"):
            raise ValueError(f"unknown scoring '{scoring}'")
        qvec = None
        if query_vector is not None:
            qvec = np.asarray(query_vector, dtype=np.float64)
            with self._lock:
                self._check_dim(collection, qvec.shape[0], write=False)
        if scoring in ("dense", "hybrid") and qvec is None:
            raise ValueError(f"{scoring} scoring needs a query vector")
        if scoring in ("sparse", "hybrid") and query_text is None:
            raise ValueError(f"{scoring} scoring needs query text")
        qbag = term_bag(query_text) if query_text is not None else {}
        qnorm = float(np.linalg.norm(qvec)) if qvec is not None else 0.0

        scored: list[tuple[float, str, dict]] = []
        for key, text, vec, terms, meta in self._rows(collection):
            if not all(meta.get(mk) == mv for mk, mv in meta_filter.items()):
                continue
            dense = 0.0
            if qvec is not None:
                denom = qnorm * float(np.linalg.norm(vec))
                dense = float(np.dot(qvec, vec)) / denom if denom > 0 else 0.0
            sparse = sparse_cosine(qbag, terms) if qbag else 0.0
            score = {"dense": dense, "sparse": sparse, "hybrid": max(dense, sparse)}[scoring]
            scored.append((score, key, {"key": key, "text": text, "meta": meta, "score": score}))
        scored.sort(key=lambda item: (-item[0], item[1]))
        return [entry for _, _, entry in scored[:k]]
