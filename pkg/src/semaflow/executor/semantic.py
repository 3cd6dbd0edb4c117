"""Semantic operator execution routes.

Three implementations:

- per_row_llm: one chat call per row (or row pair for SemJoin). A filter
  keeps a row when the first non-blank response word is yes/true/keep.
- vector_index: embedding similarity only, zero chat calls. Thresholds are
  normalized similarity in [0, 1] (cosine rescaled), so tau=0 passes all.
- cascade: vector prefilter, then the cheapest model, then the assigned
  large model verifying the positives. Output is always a subset of what
  the large model alone would keep (given identical verdicts per row).
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from .. import rowprompts
from ..errors import ExecutionError, ProviderError, UnknownFixture
from ..models import ModelSpec
from ..plan_ir import GROUP_LABEL_COLUMN, Column, Op, PlanNode, Schema
from ..provider.base import ChatProvider, ChatRequest, ChatResponse, Embedder
from ..provider.mock import similarity01
from .table import Table

PER_ROW_LLM = "per_row_llm"
VECTOR_INDEX = "vector_index"
CASCADE = "cascade"

SEMANTIC_IMPLS = (PER_ROW_LLM, VECTOR_INDEX, CASCADE)


@dataclass
class CascadeSettings:
    tau: float = 0.2
    verify_positives: bool = True


@dataclass
class ExecSettings:
    retries: int = 2
    backoff_base: float = 0.05
    parallelism: int = 1
    vector_tau: float = 0.6
    cascade: CascadeSettings = field(default_factory=CascadeSettings)


@dataclass
class NodeStats:
    op: str
    impl: str | None = None
    rows_in: int = 0
    rows_out: int = 0
    calls: int = 0
    input_tokens: int = 0
    output_tokens: int = 0
    unparsed: int = 0
    stages: dict[str, int] = field(default_factory=dict)
    # model_name -> [input_tokens, output_tokens, fee_in, fee_out]; cost is
    # derived from integer totals so it matches the estimator's arithmetic
    # exactly when per-call token counts are constant
    billed: dict[str, list] = field(default_factory=dict)

    @property
    def cost(self) -> float:
        return sum(
            tin * fee_in + tout * fee_out
            for tin, tout, fee_in, fee_out in self.billed.values()
        )


class SemanticRunner:
    """Holds providers and settings; executes one semantic node at a time."""

    def __init__(
        self,
        chat: ChatProvider | None,
        embedder: Embedder | None,
        settings: ExecSettings,
        registry: list[ModelSpec] | None = None,
    ):
        self.chat = chat
        self.embedder = embedder
        self.settings = settings
        self.registry = sorted(registry, key=lambda m: m.tier) if registry else []

    # -- provider plumbing ------------------------------------------------

    def _call(self, model: ModelSpec | None, prompt: str, stats: NodeStats) -> ChatResponse:
        if self.chat is None:
            raise ExecutionError("ProviderError: no chat provider configured")
        name = model.model_name if model else "default"
        request = ChatRequest(model=name, prompt=prompt, temperature=0.0)
        attempt = 0
        while True:
            try:
                response = self.chat.chat(request)
                break
            except UnknownFixture:
                raise  # replay misses are deterministic; retrying is noise
            except ProviderError:
                if attempt >= self.settings.retries:
                    raise
                time.sleep(self.settings.backoff_base * (2**attempt))
                attempt += 1
        stats.calls += 1
        stats.input_tokens += response.input_tokens
        stats.output_tokens += response.output_tokens
        if model is not None:
            entry = stats.billed.setdefault(
                model.model_name, [0, 0, model.fee_in, model.fee_out]
            )
            entry[0] += response.input_tokens
            entry[1] += response.output_tokens
        return response

    def _map_calls(self, model, prompts: list[str], stats: NodeStats) -> list[ChatResponse]:
        if self.settings.parallelism > 1 and len(prompts) > 1:
            with ThreadPoolExecutor(max_workers=self.settings.parallelism) as pool:
                return list(pool.map(lambda p: self._call(model, p, stats), prompts))
        return [self._call(model, p, stats) for p in prompts]

    def _cheapest_model(self) -> ModelSpec | None:
        return self.registry[0] if self.registry else None

    def default_impl(self, node: PlanNode) -> str:
        if (
            node.op == Op.SEM_FILTER
            and self.embedder is not None
            and len(self.registry) >= 2
        ):
            return CASCADE
        return PER_ROW_LLM

    # -- routes ------------------------------------------------------------

    def run(
        self,
        node: PlanNode,
        inputs: list[Table],
        model: ModelSpec | None,
        impl: str,
        stats: NodeStats,
    ) -> Table:
        stats.impl = impl
        if node.op == Op.SEM_FILTER:
            if impl == VECTOR_INDEX:
                return self._filter_vector(node, inputs[0], self.settings.vector_tau, stats)
            if impl == CASCADE:
                return self._filter_cascade(node, inputs[0], model, stats)
            return self._filter_per_row(node, inputs[0], model, stats)
        if impl != PER_ROW_LLM:
            raise ExecutionError(
                f"implementation '{impl}' is only available for SemFilter", node.node_id
            )
        if node.op == Op.SEM_EXTRACT:
            return self._extract(node, inputs[0], model, stats)
        if node.op == Op.SEM_GROUP:
            return self._group(node, inputs[0], model, stats)
        if node.op == Op.SEM_JOIN:
            return self._join(node, inputs[0], inputs[1], model, stats)
        raise ExecutionError(f"not a semantic operator: {node.op}", node.node_id)

    def _filter_verdicts(
        self, node: PlanNode, table: Table, rows: list[int], model, stats: NodeStats
    ) -> list[bool]:
        dicts = list(table.iter_dicts())
        prompts = [
            rowprompts.render(node, rowprompts.variable_text(node, dicts[i])) for i in rows
        ]
        responses = self._map_calls(model, prompts, stats)
        return [rowprompts.is_affirmative(r.text) for r in responses]

    def _filter_per_row(self, node: PlanNode, table: Table, model, stats: NodeStats) -> Table:
        verdicts = self._filter_verdicts(node, table, list(range(len(table))), model, stats)
        rows = [row for row, keep in zip(table.rows, verdicts) if keep]
        return Table(schema=table.schema, rows=rows)

    def _row_similarities(self, node: PlanNode, table: Table) -> list[float]:
        if self.embedder is None:
            raise ExecutionError("vector route needs an embedder", node.node_id)
        columns = node.attrs["columns"]
        idx = [table.schema.index_of(c) for c in columns]
        texts = [" ".join("" if r[i] is None else str(r[i]) for i in idx) for r in table.rows]
        if not texts:
            return []
        predicate_vec = self.embedder.embed([node.attrs["predicate_prompt"]])[0]
        row_vecs = self.embedder.embed(texts)
        return [similarity01(v, predicate_vec) for v in row_vecs]

    def _filter_vector(self, node: PlanNode, table: Table, tau: float, stats: NodeStats) -> Table:
        sims = self._row_similarities(node, table)
        rows = [row for row, s in zip(table.rows, sims) if s >= tau]
        stats.stages["vector_pass"] = len(rows)
        return Table(schema=table.schema, rows=rows)

    def _filter_cascade(self, node: PlanNode, table: Table, model, stats: NodeStats) -> Table:
        sims = self._row_similarities(node, table)
        tau = self.settings.cascade.tau
        survivors = [i for i, s in enumerate(sims) if s >= tau]
        stats.stages["vector_pass"] = len(survivors)

        small = self._cheapest_model()
        small_verdicts = self._filter_verdicts(node, table, survivors, small, stats)
        positives = [i for i, keep in zip(survivors, small_verdicts) if keep]
        stats.stages["small_pass"] = len(positives)

        if self.settings.cascade.verify_positives and positives:
            large = model if model is not None else (self.registry[-1] if self.registry else None)
            large_verdicts = self._filter_verdicts(node, table, positives, large, stats)
            positives = [i for i, keep in zip(positives, large_verdicts) if keep]
        stats.stages["large_pass"] = len(positives)
        keep = set(positives)
        return Table(
            schema=table.schema,
            rows=[row for i, row in enumerate(table.rows) if i in keep],
        )

    def _extract(self, node: PlanNode, table: Table, model, stats: NodeStats) -> Table:
        targets = node.attrs["target_columns"]
        out_schema = Schema(
            table.schema.columns + tuple(Column(t, "text") for t in targets)
        )
        dicts = list(table.iter_dicts())
        prompts = [
            rowprompts.render(node, rowprompts.variable_text(node, d)) for d in dicts
        ]
        responses = self._map_calls(model, prompts, stats)
        rows = []
        for row, response in zip(table.rows, responses):
            parsed = rowprompts.parse_extract_response(response.text, targets)
            if any(parsed[t] == "" for t in targets):
                stats.unparsed += 1
            rows.append(row + tuple(parsed[t] for t in targets))
        return Table(schema=out_schema, rows=rows)

    def _group(self, node: PlanNode, table: Table, model, stats: NodeStats) -> Table:
        out_schema = Schema(table.schema.columns + (Column(GROUP_LABEL_COLUMN, "text"),))
        dicts = list(table.iter_dicts())
        prompts = [
            rowprompts.render(node, rowprompts.variable_text(node, d)) for d in dicts
        ]
        responses = self._map_calls(model, prompts, stats)
        rows = []
        for row, response in zip(table.rows, responses):
            label = response.text.strip().splitlines()[0].strip() if response.text.strip() else ""
            if not label:
                stats.unparsed += 1
            rows.append(row + (label,))
        return Table(schema=out_schema, rows=rows)

    def _join(self, node: PlanNode, left: Table, right: Table, model, stats: NodeStats) -> Table:
        out_schema = left.schema.concat(right.schema)
        left_dicts = list(left.iter_dicts())
        right_dicts = list(right.iter_dicts())
        pairs = [
            (li, ri) for li in range(len(left.rows)) for ri in range(len(right.rows))
        ]
        prompts = [
            rowprompts.render(
                node, rowprompts.join_variable_text(node, left_dicts[li], right_dicts[ri])
            )
            for li, ri in pairs
        ]
        responses = self._map_calls(model, prompts, stats)
        rows = [
            left.rows[li] + right.rows[ri]
            for (li, ri), resp in zip(pairs, responses)
            if rowprompts.is_affirmative(resp.text)
        ]
        return Table(schema=out_schema, rows=rows)
