"""Cost-guarded plan rewrites.

Three rewrites run to a fixpoint:

1. Relational filters sink below semantic unary operators and into the
   matching branch of a semantic join, so fewer rows reach the model.
2. Multi-target extractions split into single-target pieces; a piece whose
   output nobody reads floats to the root (or disappears when a projection
   above discards it).
3. A piece that feeds a later filter or join stops right below its first
   consumer.

Splitting and hoisting are one atomic candidate per extraction node. When
a cost model is supplied, a candidate is applied only if the estimated
plan cost does not increase under a uniform model assignment; without one
the rewrites are purely structural. Every rewrite preserves the result
multiset: moved filters commute with row-wise operators, and extraction
values depend only on row content.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..models import ModelSpec
from ..plan_ir import (
    Op,
    Plan,
    PlanNode,
    columns_in,
    infer_schema,
    replace_node,
)
from .cost import CostModel, uniform_assignment

# unary operators a floating extraction may pass through; extractions do
# not cross each other (the swap is cost-neutral and would never settle)
CROSSABLE = frozenset({Op.FILTER, Op.SEM_FILTER, Op.SORT, Op.LIMIT, Op.SEM_GROUP})

SEMANTIC_UNARY = frozenset({Op.SEM_FILTER, Op.SEM_EXTRACT, Op.SEM_GROUP})


@dataclass
class RewriteEvent:
    rule: int
    node_id: int
    detail: str
    cost_before: float | None
    cost_after: float | None
    applied: bool

    def to_dict(self) -> dict:
        return {
            "rule": self.rule,
            "node_id": self.node_id,
            "detail": self.detail,
            "cost_before": self.cost_before,
            "cost_after": self.cost_after,
            "applied": self.applied,
        }


def referenced_columns(node: PlanNode) -> set[str]:
    """Columns an operator reads from its input."""
    op = node.op
    if op == Op.FILTER:
        return set(columns_in(node.attrs["predicate"]))
    if op == Op.PROJECT:
        out: set[str] = set()
        for _, expr in node.attrs["items"]:
            out.update(columns_in(expr))
        return out
    if op in (Op.JOIN, Op.MERGE):
        return set(columns_in(node.attrs["condition"]))
    if op == Op.AGGREGATE:
        cols = set(node.attrs["keys"])
        for _, column, _ in node.attrs["aggs"]:
            if column != "*":
                cols.add(column)
        return cols
    if op == Op.SORT:
        return set(node.attrs["keys"])
    if op == Op.SEM_FILTER or op == Op.SEM_GROUP:
        return set(node.attrs["columns"])
    if op == Op.SEM_EXTRACT:
        return set(node.attrs["source_columns"])
    if op == Op.SEM_JOIN:
        return set(node.attrs["left_cols"]) | set(node.attrs["right_cols"])
    return set()


def _nodes_by_id(root: PlanNode) -> list[PlanNode]:
    return sorted(root.walk(), key=lambda n: n.node_id)


def _parent_map(root: PlanNode) -> dict[int, PlanNode]:
    parents: dict[int, PlanNode] = {}
    for node in root.walk():
        for child in node.children:
            parents[child.node_id] = node
    return parents


# -- RULE 1: filter pushdown -----------------------------------------------------


def _rule1_candidate(root: PlanNode, filt: PlanNode, schemas) -> tuple[PlanNode, str] | None:
    child = filt.children[0]
    pred_cols = set(columns_in(filt.attrs["predicate"]))
    if child.op in SEMANTIC_UNARY:
        below = schemas.get(child.children[0].node_id)
        if below is None or not all(below.has(c) for c in pred_cols):
            return None
        swapped = child.with_children((filt.with_children((child.children[0],)),))
        return replace_node(root, filt.node_id, swapped), f"filter below {child.op.value}"
    if child.op == Op.SEM_JOIN:
        left, right = child.children
        for branch, index, side in ((left, 0, "left"), (right, 1, "right")):
            schema = schemas.get(branch.node_id)
            if schema is not None and pred_cols and all(schema.has(c) for c in pred_cols):
                kids = list(child.children)
                kids[index] = filt.with_children((branch,))
                return (
                    replace_node(root, filt.node_id, child.with_children(tuple(kids))),
                    f"filter into {side} branch of SemJoin",
                )
    return None


# -- RULES 2 and 3: split and float extractions -----------------------------------


def _split_extract(root: PlanNode, node: PlanNode, next_id: int) -> tuple[PlanNode, list[int], int]:
    """Replace a pairwise multi-target extraction with a chain of pieces."""
    sources = node.attrs["source_columns"]
    targets = node.attrs["target_columns"]
    instruction = node.attrs["instruction_prompt"]
    current = node.children[0]
    piece_ids: list[int] = []
    for i, (source, target) in enumerate(zip(sources, targets)):
        piece_id = node.node_id if i == 0 else next_id
        if i > 0:
            next_id += 1
        current = PlanNode(
            node_id=piece_id,
            op=Op.SEM_EXTRACT,
            attrs={
                "source_columns": (source,),
                "target_columns": (target,),
                "instruction_prompt": instruction,
            },
            children=(current,),
        )
        piece_ids.append(piece_id)
    return replace_node(root, node.node_id, current), piece_ids, next_id


def _hoist_fully(root: PlanNode, piece_id: int) -> tuple[PlanNode, bool]:
    """Float one single-target piece as high as legality allows.

    Returns the new root and whether a consumer (not a structural barrier)
    stopped the climb.
    """
    blocked_by_consumer = False
    while True:
        parents = _parent_map(root)
        piece = root.find(piece_id)
        parent = parents.get(piece_id)
        if parent is None:
            break
        target = piece.attrs["target_columns"][0]
        if target in referenced_columns(parent):
            blocked_by_consumer = True
            break
        if parent.op not in CROSSABLE:
            break
        rotated = piece.with_children((parent.with_children((piece.children[0],)),))
        root = replace_node(root, parent.node_id, rotated)
    return root, blocked_by_consumer


def _normalize_extract(root: PlanNode, node: PlanNode, next_id: int):
    """Split (when pairwise) and float every piece; None when nothing moves."""
    from .. import rowprompts

    piece_ids = [node.node_id]
    new_root = root
    if len(node.attrs["target_columns"]) > 1 and rowprompts.extract_is_pairwise(node):
        new_root, piece_ids, next_id = _split_extract(root, node, next_id)
    after_split = new_root
    any_consumer = False
    for piece_id in reversed(piece_ids):  # top of the chain first
        new_root, blocked = _hoist_fully(new_root, piece_id)
        any_consumer = any_consumer or blocked
    if new_root == after_split:  # splitting without movement only adds calls
        return None
    if len(piece_ids) > 1:
        detail = f"split into {len(piece_ids)} single-target pieces and floated"
    else:
        detail = "floated upward"
    return new_root, detail, next_id, any_consumer


def _dead_piece_candidate(root: PlanNode, node: PlanNode, parents) -> tuple[PlanNode, str] | None:
    if len(node.attrs["target_columns"]) != 1:
        return None
    parent = parents.get(node.node_id)
    if parent is None or parent.op not in (Op.PROJECT, Op.AGGREGATE):
        return None
    target = node.attrs["target_columns"][0]
    if target in referenced_columns(parent):
        return None
    return replace_node(root, node.node_id, None), f"dropped unused extraction of {target}"


# -- driver ------------------------------------------------------------------------


class RuleEngine:
    def __init__(
        self,
        cost_model: CostModel | None = None,
        model: ModelSpec | None = None,
        store=None,
        max_passes: int = 50,
    ):
        self.cost_model = cost_model
        self.model = model
        self.store = store if store is not None else (cost_model.source if cost_model else None)
        self.max_passes = max_passes
        self.trace: list[RewriteEvent] = []

    def _accepts(self, rule: int, node_id: int, detail: str, before: Plan, after: Plan) -> bool:
        if self.cost_model is None or self.model is None:
            self.trace.append(RewriteEvent(rule, node_id, detail, None, None, True))
            return True
        cost_before = self.cost_model.estimate(
            before, uniform_assignment(before, self.model)
        ).total_cost
        cost_after = self.cost_model.estimate(
            after, uniform_assignment(after, self.model)
        ).total_cost
        applied = cost_after <= cost_before
        self.trace.append(
            RewriteEvent(rule, node_id, detail, cost_before, cost_after, applied)
        )
        return applied

    def run(self, plan: Plan) -> Plan:
        root = plan.root
        next_id = root.max_id() + 1
        rejected: set[tuple[int, int]] = set()
        for _ in range(self.max_passes):
            root, next_id, changed = self._one_pass(root, next_id, rejected)
            if not changed:
                break
            rejected.clear()
        return Plan(root=root)

    def _one_pass(self, root: PlanNode, next_id: int, rejected) -> tuple[PlanNode, int, bool]:
        schemas = (
            infer_schema(Plan(root=root), self.store) if self.store is not None else {}
        )
        parents = _parent_map(root)
        # extraction moves run before filter pushdown so the fixpoint shape
        # does not depend on how the plan numbered its nodes
        for node in _nodes_by_id(root):
            if node.op != Op.SEM_EXTRACT:
                continue
            if (2, node.node_id) not in rejected:
                dead = _dead_piece_candidate(root, node, parents)
                if dead is not None:
                    new_root, detail = dead
                    if self._accepts(2, node.node_id, detail, Plan(root=root), Plan(root=new_root)):
                        return new_root, next_id, True
                    rejected.add((2, node.node_id))
            if (3, node.node_id) not in rejected:
                moved = _normalize_extract(root, node, next_id)
                if moved is not None:
                    new_root, detail, new_next, any_consumer = moved
                    rule = 3 if any_consumer else 2
                    if self._accepts(rule, node.node_id, detail, Plan(root=root), Plan(root=new_root)):
                        return new_root, new_next, True
                    rejected.add((3, node.node_id))
        for node in _nodes_by_id(root):
            if node.op != Op.FILTER or (1, node.node_id) in rejected:
                continue
            candidate = _rule1_candidate(root, node, schemas)
            if candidate is not None:
                new_root, detail = candidate
                if self._accepts(1, node.node_id, detail, Plan(root=root), Plan(root=new_root)):
                    return new_root, next_id, True
                rejected.add((1, node.node_id))
        return root, next_id, False


def apply_rules(
    plan: Plan,
    cost_model: CostModel | None = None,
    model: ModelSpec | None = None,
    store=None,
    max_passes: int = 50,
) -> tuple[Plan, list[RewriteEvent]]:
    engine = RuleEngine(cost_model=cost_model, model=model, store=store, max_passes=max_passes)
    out = engine.run(plan)
    return out, engine.trace


__all__ = [
    "CROSSABLE",
    "RewriteEvent",
    "RuleEngine",
    "apply_rules",
    "referenced_columns",
]
