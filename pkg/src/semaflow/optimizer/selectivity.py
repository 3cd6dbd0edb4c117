"""Selectivity estimation by progressive sampling.

Filter predicates are evaluated on doubling batches (64, 128, ...) of a
seeded shuffle of the origin table until the Wald confidence half-width
drops to the configured bound or the sample cap is reached. Semantic
predicates go through the cheapest registry model one row at a time.
Provider failures fall back to the default selectivity with a warning.

Estimates are cached by predicate and dataset, not by node id, so a moved
operator keeps its estimate and before/after cost comparisons stay
coherent.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass

from .. import rowprompts
from ..errors import ProviderError, SemaflowError
from ..models import ModelSpec
from ..plan_ir import Expr, PlanNode, eval_expr, expr_to_json
from ..provider.base import ChatProvider, ChatRequest, Embedder
from .config import OptimizerConfig

SAMPLED = "sampled"
DEFAULT = "default"
FALLBACK = "fallback"


@dataclass(frozen=True)
class SelectivityEstimate:
    selectivity: float
    sample_size: int
    half_width: float
    method: str  # sampled | default | fallback


def _stable_seed(base: int, key: str) -> int:
    digest = hashlib.blake2b(key.encode("utf-8"), digest_size=8).digest()
    return (base + int.from_bytes(digest, "big")) % (2**63)


def _shuffled_indices(n: int, seed: int) -> list[int]:
    import numpy as np

    rng = np.random.default_rng(seed)
    return list(rng.permutation(n))


class SelectivityAnalyzer:
    """Caches per-predicate estimates; owns all sampling randomness."""

    def __init__(
        self,
        source=None,
        chat: ChatProvider | None = None,
        embedder: Embedder | None = None,
        registry: list[ModelSpec] | None = None,
        config: OptimizerConfig | None = None,
    ):
        self.source = source
        self.chat = chat
        self.embedder = embedder
        self.registry = sorted(registry, key=lambda m: m.tier) if registry else []
        self.config = config or OptimizerConfig()
        self.cache: dict[str, SelectivityEstimate] = {}
        self.warnings: list[str] = []

    def preset(self, key: str, selectivity: float):
        """Pin an estimate (tests and explain replays)."""
        self.cache[key] = SelectivityEstimate(selectivity, 0, 0.0, "preset")

    # -- keys -----------------------------------------------------------------

    @staticmethod
    def relational_key(predicate: Expr, dataset: str | None) -> str:
        return f"rel|{dataset}|{json.dumps(expr_to_json(predicate), sort_keys=True)}"

    @staticmethod
    def semantic_key(node: PlanNode, dataset: str | None) -> str:
        cols = ",".join(node.attrs["columns"])
        return f"sem|{dataset}|{node.attrs['predicate_prompt']}|{cols}"

    @staticmethod
    def join_key(conjunct: Expr, left: str | None, right: str | None) -> str:
        return f"join|{left}|{right}|{json.dumps(expr_to_json(conjunct), sort_keys=True)}"

    # -- sampling core ----------------------------------------------------------

    def _default(self, key: str, value: float, method: str = DEFAULT) -> SelectivityEstimate:
        estimate = SelectivityEstimate(value, 0, 0.0, method)
        self.cache[key] = estimate
        return estimate

    def _progressive(self, key: str, total: int, hit_fn) -> SelectivityEstimate:
        """hit_fn(index) -> bool over a seeded shuffle of range(total)."""
        cfg = self.config
        order = _shuffled_indices(total, _stable_seed(cfg.seed, key))
        cap = min(total, cfg.max_sample)
        n = 0
        hits = 0
        batch = cfg.batch_start
        while n < cap:
            take = min(batch, cap - n)
            for i in order[n : n + take]:
                if hit_fn(i):
                    hits += 1
            n += take
            p = hits / n
            half = cfg.z_value * math.sqrt(max(p * (1 - p), 0.0) / n)
            if half <= cfg.ci_halfwidth or n >= cap:
                break
            batch *= 2
        p = hits / n if n else cfg.default_selectivity
        half = cfg.z_value * math.sqrt(max(p * (1 - p), 0.0) / n) if n else 0.0
        estimate = SelectivityEstimate(p, n, half, SAMPLED)
        self.cache[key] = estimate
        return estimate

    def _load_rows(self, dataset: str):
        table = self.source.load_table(dataset)
        return list(table.iter_dicts())

    # -- relational filters -----------------------------------------------------

    def relational_selectivity(self, predicate: Expr, dataset: str | None) -> SelectivityEstimate:
        key = self.relational_key(predicate, dataset)
        if key in self.cache:
            return self.cache[key]
        if dataset is None or self.source is None:
            return self._default(key, self.config.default_selectivity)
        try:
            rows = self._load_rows(dataset)
        except SemaflowError:
            return self._default(key, self.config.default_selectivity, FALLBACK)
        if not rows:
            return self._default(key, self.config.default_selectivity)

        def hit(i: int) -> bool:
            try:
                return eval_expr(predicate, rows[i]) is True
            except (SemaflowError, ZeroDivisionError, KeyError):
                return False

        return self._progressive(key, len(rows), hit)

    # -- semantic filters ----------------------------------------------------------

    def semantic_selectivity(self, node: PlanNode, dataset: str | None) -> SelectivityEstimate:
        key = self.semantic_key(node, dataset)
        if key in self.cache:
            return self.cache[key]
        if dataset is None or self.source is None or self.chat is None:
            return self._default(key, self.config.default_selectivity)
        model = self.registry[0].model_name if self.registry else "default"
        try:
            rows = self._load_rows(dataset)
        except SemaflowError:
            return self._default(key, self.config.default_selectivity, FALLBACK)
        if not rows:
            return self._default(key, self.config.default_selectivity)
        columns = node.attrs["columns"]

        def hit(i: int) -> bool:
            padded = {c: rows[i].get(c) for c in columns}
            prompt = rowprompts.render(node, rowprompts.variable_text(node, padded))
            response = self.chat.chat(ChatRequest(model=model, prompt=prompt))
            return rowprompts.is_affirmative(response.text)

        try:
            return self._progressive(key, len(rows), hit)
        except ProviderError as e:
            self.warnings.append(
                f"selectivity sampling failed for node {node.node_id}: {e}; using default"
            )
            return self._default(key, self.config.default_selectivity, FALLBACK)

    # -- join conjuncts ----------------------------------------------------------------

    def join_selectivity(
        self, conjunct: Expr, left_dataset: str | None, right_dataset: str | None
    ) -> SelectivityEstimate:
        key = self.join_key(conjunct, left_dataset, right_dataset)
        if key in self.cache:
            return self.cache[key]
        if left_dataset is None or right_dataset is None or self.source is None:
            return self._default(key, self.config.default_join_selectivity)
        try:
            left = self._load_rows(left_dataset)
            right = self._load_rows(right_dataset)
        except SemaflowError:
            return self._default(key, self.config.default_join_selectivity, FALLBACK)
        if not left or not right:
            return self._default(key, self.config.default_join_selectivity)
        cap = self.config.batch_start
        li = _shuffled_indices(len(left), _stable_seed(self.config.seed, key + "|L"))[:cap]
        ri = _shuffled_indices(len(right), _stable_seed(self.config.seed, key + "|R"))[:cap]
        pairs = 0
        hits = 0
        for i in li:
            for j in ri:
                merged = dict(left[i])
                merged.update(right[j])
                pairs += 1
                try:
                    if eval_expr(conjunct, merged) is True:
                        hits += 1
                except (SemaflowError, ZeroDivisionError, KeyError):
                    pass
        p = hits / pairs if pairs else self.config.default_join_selectivity
        estimate = SelectivityEstimate(p, pairs, 0.0, SAMPLED)
        self.cache[key] = estimate
        return estimate

    # -- importance-weighted value lengths -------------------------------------------------

    def average_value_chars(self, dataset: str | None, column: str, weight_text: str) -> float:
        """Mean character count of one column, importance-weighted.

        Weights are 0.5 + cosine(value embedding, predicate embedding) and
        the estimator is self-normalized, so a constant-length column always
        averages to exactly that length.
        """
        digest = hashlib.blake2b(weight_text.encode("utf-8"), digest_size=6).hexdigest()
        key = f"chars|{dataset}|{column}|{digest}"
        if key in self.cache:
            return self.cache[key].selectivity
        if dataset is None or self.source is None:
            return self._default(key, 0.0).selectivity
        try:
            rows = self._load_rows(dataset)
        except SemaflowError:
            return self._default(key, 0.0, FALLBACK).selectivity
        values = ["" if r.get(column) is None else str(r.get(column)) for r in rows]
        if not values:
            return self._default(key, 0.0).selectivity
        lengths_all = [len(v) for v in values]
        if min(lengths_all) == max(lengths_all):
            # constant width: report it exactly, no estimator noise
            avg = float(lengths_all[0])
            self.cache[key] = SelectivityEstimate(avg, len(values), 0.0, SAMPLED)
            return avg
        m = min(len(values), self.config.importance_sample)
        if self.embedder is None:
            order = _shuffled_indices(len(values), _stable_seed(self.config.seed, key))[:m]
            avg = sum(lengths_all[i] for i in order) / m
        else:
            import numpy as np

            pred_vec = self.embedder.embed([weight_text])[0]
            vecs = self.embedder.embed(values)
            sims = vecs @ pred_vec
            weights = np.clip(0.5 + sims, 0.05, None)  # keep strictly positive
            probs = weights / weights.sum()
            rng = np.random.default_rng(_stable_seed(self.config.seed, key))
            draws = rng.choice(len(values), size=m, replace=True, p=probs)
            inv = 1.0 / probs[draws]
            lengths = np.array([lengths_all[i] for i in draws], dtype=np.float64)
            # self-normalized importance estimate of the mean length
            avg = float((lengths * inv).sum() / inv.sum())
        self.cache[key] = SelectivityEstimate(avg, m, 0.0, SAMPLED)
        return avg


__all__ = [
    "DEFAULT",
    "FALLBACK",
    "SAMPLED",
    "SelectivityAnalyzer",
    "SelectivityEstimate",
]
