"""Plan cost estimation.

Total cost is the sum over semantic operators of
calls x (input_tokens x fee_in + output_tokens x fee_out).
Cardinalities propagate bottom-up through sampled selectivities; input
tokens per call mirror the executor's prompt layout exactly (head + row
values + tail, tokens = ceil(chars / 4)), so on constant-width columns the
estimate equals the incurred cost to the last digit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

from .. import rowprompts
from ..errors import MissingAssignment, SemaflowError
from ..models import ModelSpec
from ..plan_ir import Call, Op, Plan, PlanNode, columns_in
from ..provider.base import Embedder
from .config import OptimizerConfig
from .selectivity import SelectivityAnalyzer

ROW_PRESERVING_UNARY = frozenset(
    {Op.PROJECT, Op.SORT, Op.SEM_EXTRACT, Op.SEM_GROUP, Op.SCRIPT}
)


@dataclass
class NodeCost:
    node_id: int
    op: str
    cardinality: float
    calls: float = 0.0
    input_tokens: int = 0
    output_tokens: int = 0
    cost: float = 0.0
    selectivity: float | None = None


@dataclass
class PlanCost:
    total_cost: float
    per_node: dict[int, NodeCost] = field(default_factory=dict)

    def cardinality_of(self, node_id: int) -> float:
        return self.per_node[node_id].cardinality


def uniform_assignment(plan: Plan, model: ModelSpec) -> dict[int, ModelSpec]:
    return {n.node_id: model for n in plan.root.walk() if n.is_semantic}


class CostModel:
    def __init__(
        self,
        source=None,
        analyzer: SelectivityAnalyzer | None = None,
        embedder: Embedder | None = None,
        config: OptimizerConfig | None = None,
    ):
        self.config = config or OptimizerConfig()
        self.analyzer = analyzer or SelectivityAnalyzer(
            source=source, embedder=embedder, config=self.config
        )
        self.source = source if source is not None else self.analyzer.source

    # -- origin resolution ---------------------------------------------------

    def _scan_descendants(self, node: PlanNode) -> tuple[list[PlanNode], bool]:
        """(FileScans under node, whether any opaque scan is present)."""
        scans: list[PlanNode] = []
        opaque = False
        for n in node.walk():
            if n.op == Op.FILE_SCAN:
                scans.append(n)
            elif n.op in (Op.DB_SCAN, Op.SCRIPT):
                opaque = True
        return scans, opaque

    def origin_dataset(self, node: PlanNode, columns=None) -> str | None:
        """The single base table feeding this subtree, if provable.

        With several scans or any opaque source the origin is unknown and
        callers fall back to defaults. When ``columns`` is given the origin
        must also carry every one of them.
        """
        scans, opaque = self._scan_descendants(node)
        if opaque or len(scans) != 1 or self.source is None:
            return None
        dataset = scans[0].attrs["dataset"]
        if columns:
            try:
                schema = self.source.schema_of(dataset)
            except SemaflowError:
                return None
            if schema is None or not all(schema.has(c) for c in columns):
                return None
        return dataset

    def column_origin(self, node: PlanNode, column: str) -> str | None:
        """First FileScan below the node whose base schema has the column."""
        scans, _ = self._scan_descendants(node)
        if self.source is None:
            return None
        for scan in scans:
            try:
                schema = self.source.schema_of(scan.attrs["dataset"])
            except SemaflowError:
                continue
            if schema is not None and schema.has(column):
                return scan.attrs["dataset"]
        return None

    # -- cardinality ------------------------------------------------------------

    def _scan_rows(self, node: PlanNode) -> float:
        if node.op == Op.FILE_SCAN and self.source is not None:
            try:
                return float(self.source.row_count(node.attrs["dataset"]))
            except SemaflowError:
                return float(self.config.default_scan_rows)
        return float(self.config.default_scan_rows)

    def _covered(self, datasets: list[str | None], columns) -> bool:
        if self.source is None:
            return False
        available = set()
        for dataset in datasets:
            if dataset is None:
                return False
            try:
                schema = self.source.schema_of(dataset)
            except SemaflowError:
                return False
            if schema is None:
                return False
            available.update(schema.names())
        return all(c in available for c in columns)

    def _join_condition_selectivity(self, node: PlanNode) -> float:
        left_ds = self.origin_dataset(node.children[0])
        right_ds = self.origin_dataset(node.children[1])
        sel = 1.0
        for conjunct in split_conjuncts(node.attrs["condition"]):
            cols = columns_in(conjunct)
            usable = bool(cols) and self._covered([left_ds, right_ds], cols)
            est = self.analyzer.join_selectivity(
                conjunct, left_ds if usable else None, right_ds if usable else None
            )
            sel *= est.selectivity
        return sel

    def _node_cardinality(self, node: PlanNode, cards: dict[int, float], out: dict[int, NodeCost]):
        cfg = self.config
        kids = [cards[c.node_id] for c in node.children]
        sel: float | None = None
        if node.op in (Op.FILE_SCAN, Op.DB_SCAN):
            card = self._scan_rows(node)
        elif node.op == Op.FILTER:
            dataset = self.origin_dataset(
                node.children[0], columns_in(node.attrs["predicate"])
            )
            est = self.analyzer.relational_selectivity(node.attrs["predicate"], dataset)
            sel = est.selectivity
            card = kids[0] * sel
        elif node.op == Op.SEM_FILTER:
            dataset = self.origin_dataset(node.children[0], node.attrs["columns"])
            est = self.analyzer.semantic_selectivity(node, dataset)
            sel = est.selectivity
            card = kids[0] * sel
        elif node.op in (Op.JOIN, Op.MERGE):
            sel = self._join_condition_selectivity(node)
            mode = node.attrs["mode"]
            l, r = kids
            if mode == "inner":
                card = l * r * sel
            elif mode == "left":
                card = max(l, l * r * sel)
            elif mode == "semi":
                card = l * min(1.0, r * sel)
            else:  # anti
                card = l - l * min(1.0, r * sel)
        elif node.op == Op.SEM_JOIN:
            sel = cfg.default_join_selectivity
            card = kids[0] * kids[1] * sel
        elif node.op == Op.AGGREGATE:
            if node.attrs["keys"]:
                card = max(1.0, math.ceil(kids[0] * cfg.group_ratio))
            else:
                card = 1.0
        elif node.op == Op.UNION:
            card = float(sum(kids))
        elif node.op == Op.LIMIT:
            card = min(float(node.attrs["k"]), kids[0])
        elif node.op in ROW_PRESERVING_UNARY:
            card = kids[0]
        else:
            card = kids[0] if kids else float(cfg.default_scan_rows)
        cards[node.node_id] = card
        out[node.node_id] = NodeCost(
            node_id=node.node_id, op=node.op.value, cardinality=card, selectivity=sel
        )

    def cardinality(self, node: PlanNode) -> float:
        cards: dict[int, float] = {}
        out: dict[int, NodeCost] = {}
        for n in node.walk():
            self._node_cardinality(n, cards, out)
        return cards[node.node_id]

    # -- tokens -------------------------------------------------------------------

    def _variable_char_model(self, node: PlanNode) -> tuple[int, list[tuple[str, PlanNode]]]:
        """(fixed separator chars, value columns paired with their branch)."""
        if node.op == Op.SEM_FILTER or node.op == Op.SEM_GROUP:
            cols = node.attrs["columns"]
            fixed = sum(len(c) + 1 for c in cols) + (len(cols) - 1)
            return fixed, [(c, node.children[0]) for c in cols]
        if node.op == Op.SEM_EXTRACT:
            sources = node.attrs["source_columns"]
            targets = node.attrs["target_columns"]
            if rowprompts.extract_is_pairwise(node):
                fixed = sum(len(t) + 4 + len(s) + 1 for t, s in zip(targets, sources))
                fixed += len(sources) - 1
            else:
                fixed = sum(len(s) + 1 for s in sources) + (len(sources) - 1)
            return fixed, [(s, node.children[0]) for s in sources]
        if node.op == Op.SEM_JOIN:
            left_cols = node.attrs["left_cols"]
            right_cols = node.attrs["right_cols"]
            fixed = sum(len(c) + 1 for c in left_cols) + (len(left_cols) - 1)
            fixed += len("\nRIGHT:\n")
            fixed += sum(len(c) + 1 for c in right_cols) + (len(right_cols) - 1)
            pairs = [(c, node.children[0]) for c in left_cols]
            pairs += [(c, node.children[1]) for c in right_cols]
            return fixed, pairs
        raise ValueError(f"not a semantic operator: {node.op}")

    def _weight_text(self, node: PlanNode) -> str:
        if node.op == Op.SEM_FILTER:
            return node.attrs["predicate_prompt"]
        if node.op == Op.SEM_EXTRACT:
            return node.attrs["instruction_prompt"]
        if node.op == Op.SEM_GROUP:
            return node.attrs["label_prompt"]
        return node.attrs["match_prompt"]

    def input_tokens_per_call(self, node: PlanNode) -> int:
        head, tail = rowprompts.static_parts(node)
        fixed, value_cols = self._variable_char_model(node)
        weight_text = self._weight_text(node)
        total = float(len(head) + len(tail) + fixed)
        for column, branch in value_cols:
            dataset = self.column_origin(branch, column)
            total += self.analyzer.average_value_chars(dataset, column, weight_text)
        return math.ceil(total / 4)

    def output_tokens_per_call(self, node: PlanNode) -> int:
        cfg = self.config
        if node.op == Op.SEM_FILTER:
            return cfg.out_tokens_sem_filter
        if node.op == Op.SEM_EXTRACT:
            return cfg.out_tokens_sem_extract_per_target * len(node.attrs["target_columns"])
        if node.op == Op.SEM_GROUP:
            return cfg.out_tokens_sem_group
        return cfg.out_tokens_sem_join

    # -- full estimate ---------------------------------------------------------------

    def estimate(self, plan: Plan, assignment: Mapping[int, ModelSpec]) -> PlanCost:
        cards: dict[int, float] = {}
        per_node: dict[int, NodeCost] = {}
        total = 0.0
        for node in plan.root.walk():
            self._node_cardinality(node, cards, per_node)
            if not node.is_semantic:
                continue
            model = assignment.get(node.node_id)
            if model is None:
                raise MissingAssignment(node.node_id)
            entry = per_node[node.node_id]
            if node.op == Op.SEM_JOIN:
                calls = cards[node.children[0].node_id] * cards[node.children[1].node_id]
            else:
                calls = cards[node.children[0].node_id]
            in_tokens = self.input_tokens_per_call(node)
            out_tokens = self.output_tokens_per_call(node)
            cost = (calls * in_tokens) * model.fee_in + (calls * out_tokens) * model.fee_out
            entry.calls = calls
            entry.input_tokens = in_tokens
            entry.output_tokens = out_tokens
            entry.cost = cost
            total += cost
        return PlanCost(total_cost=total, per_node=per_node)


def split_conjuncts(expr) -> list:
    """Flatten nested ANDs into a conjunct list."""
    if isinstance(expr, Call) and expr.op == "and":
        out = []
        for arg in expr.args:
            out.extend(split_conjuncts(arg))
        return out
    return [expr]


__all__ = [
    "CostModel",
    "NodeCost",
    "PlanCost",
    "split_conjuncts",
    "uniform_assignment",
]
