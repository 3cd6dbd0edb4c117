"""Bushy join-order search over connected subsets.

A block is a maximal run of inner joins whose conditions are conjunctions
of two-sided column equalities. Each block is reordered independently:
dp(S) = card(S) + min over connected splits of dp(S1) + dp(S2), where
card(S) multiplies base cardinalities by the selectivity of every edge
inside S. Exact for blocks up to the configured size; the original tree
is kept whenever it already meets the optimum. Relation order (and the
split tie-break) is lexicographic by relation label.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..plan_ir import (
    Call,
    Col,
    Expr,
    Op,
    Plan,
    PlanNode,
    expr_to_json,
    infer_schema,
    replace_node,
)
from .cost import CostModel, split_conjuncts

JOIN_OPS = (Op.JOIN, Op.MERGE)


@dataclass
class JoinBlock:
    root: PlanNode
    joins: list[PlanNode]
    leaves: list[PlanNode]
    labels: list[str]
    # leaf-index pair -> conjuncts between those two relations
    edges: dict[frozenset[int], list[Expr]] = field(default_factory=dict)


def _is_block_join(node: PlanNode) -> bool:
    if node.op not in JOIN_OPS or node.attrs["mode"] != "inner":
        return False
    return all(
        isinstance(c, Call)
        and c.op == "=="
        and len(c.args) == 2
        and all(isinstance(a, Col) for a in c.args)
        for c in split_conjuncts(node.attrs["condition"])
    )


def _collect_block(node: PlanNode, joins: list[PlanNode], leaves: list[PlanNode]):
    joins.append(node)
    for child in node.children:
        if _is_block_join(child):
            _collect_block(child, joins, leaves)
        else:
            leaves.append(child)


def _leaf_label(leaf: PlanNode, taken: set[str]) -> str:
    if leaf.op == Op.FILE_SCAN:
        base = leaf.attrs["dataset"]
    elif leaf.op == Op.DB_SCAN:
        base = leaf.attrs["connector"]
    else:
        base = f"sub{leaf.node_id}"
    label = base
    if label in taken:
        label = f"{base}@{leaf.node_id}"
    taken.add(label)
    return label


def find_blocks(root: PlanNode) -> list[JoinBlock]:
    """Maximal reorderable join blocks, outermost first."""
    blocks: list[JoinBlock] = []

    def visit(node: PlanNode, parent_is_block: bool):
        here_block = _is_block_join(node)
        if here_block and not parent_is_block:
            joins: list[PlanNode] = []
            leaves: list[PlanNode] = []
            _collect_block(node, joins, leaves)
            taken: set[str] = set()
            labels = [_leaf_label(leaf, taken) for leaf in leaves]
            blocks.append(
                JoinBlock(root=node, joins=joins, leaves=leaves, labels=labels)
            )
        for child in node.children:
            visit(child, here_block)

    visit(root, False)
    return blocks


def _resolve_edges(block: JoinBlock, schemas) -> bool:
    """Attach every conjunct to its pair of relations; False if any fails."""
    owners: dict[str, int] = {}
    for i, leaf in enumerate(block.leaves):
        schema = schemas.get(leaf.node_id)
        if schema is None:
            return False
        for name in schema.names():
            if name in owners:
                return False  # ambiguous column ownership
            owners[name] = i
    for join in block.joins:
        for conjunct in split_conjuncts(join.attrs["condition"]):
            a, b = conjunct.args
            ia, ib = owners.get(a.name), owners.get(b.name)
            if ia is None or ib is None or ia == ib:
                return False
            block.edges.setdefault(frozenset((ia, ib)), []).append(conjunct)
    return True


# -- the DP core (label/number level, oracle-testable) ------------------------------


def dp_best_order(rows: list[float], edges: dict[frozenset[int], float]):
    """(tree, cost, trace) minimizing summed intermediate cardinalities.

    rows[i] is relation i's cardinality; edges map index pairs to combined
    selectivity. The tree is a nested tuple of relation indices. Returns
    None when the join graph is disconnected.
    """
    n = len(rows)
    full = (1 << n) - 1
    adjacency = [0] * n
    for pair in edges:
        i, j = sorted(pair)
        adjacency[i] |= 1 << j
        adjacency[j] |= 1 << i

    card: dict[int, float] = {}

    def cardinality(mask: int) -> float:
        got = card.get(mask)
        if got is not None:
            return got
        value = 1.0
        for i in range(n):
            if mask >> i & 1:
                value *= rows[i]
        for pair, sel in edges.items():
            i, j = tuple(pair)
            if mask >> i & 1 and mask >> j & 1:
                value *= sel
        card[mask] = value
        return value

    best: dict[int, tuple[float, int | None]] = {}
    for i in range(n):
        best[1 << i] = (0.0, None)
    masks = sorted(
        (m for m in range(1, full + 1)), key=lambda m: (bin(m).count("1"), m)
    )
    for mask in masks:
        if bin(mask).count("1") < 2:
            continue
        low = mask & -mask
        choice = None
        sub = (mask - 1) & mask
        candidates = []
        while sub:
            if sub & low:
                candidates.append(sub)
            sub = (sub - 1) & mask
        for s1 in sorted(candidates):
            s2 = mask ^ s1
            if s1 not in best or s2 not in best:
                continue
            crossing = any(
                (s1 >> i & 1 and s2 >> j & 1) or (s2 >> i & 1 and s1 >> j & 1)
                for pair in edges
                for i, j in (tuple(pair),)
            )
            if not crossing:
                continue
            total = best[s1][0] + best[s2][0] + cardinality(mask)
            if choice is None or total < choice[0]:
                choice = (total, s1)
        if choice is not None:
            best[mask] = choice
    if full not in best:
        return None

    def build(mask: int):
        if bin(mask).count("1") == 1:
            return mask.bit_length() - 1
        s1 = best[mask][1]
        return (build(s1), build(mask ^ s1))

    trace = {mask: cost for mask, (cost, _) in best.items()}
    return build(full), best[full][0], trace


def _tree_cost_of_existing(block: JoinBlock, cardinality) -> float:
    """Summed intermediate cardinalities of the block as written."""
    leaf_index = {leaf.node_id: i for i, leaf in enumerate(block.leaves)}
    total = 0.0

    def mask_of(node: PlanNode) -> int:
        if node.node_id in leaf_index:
            return 1 << leaf_index[node.node_id]
        return mask_of(node.children[0]) | mask_of(node.children[1])

    for join in block.joins:
        total += cardinality(mask_of(join))
    return total


def order_joins(plan: Plan, cost_model: CostModel, max_relations: int = 12):
    """Reorder every eligible block; returns (plan, trace events)."""
    trace: list[dict] = []
    root = plan.root
    store = cost_model.source
    schemas = infer_schema(plan, store) if store is not None else {}
    for block in find_blocks(root):
        event = {
            "block_root": block.root.node_id,
            "relations": list(block.labels),
            "replaced": False,
        }
        n = len(block.leaves)
        if n < 2 or n > max_relations:
            event["detail"] = f"skipped: {n} relations"
            trace.append(event)
            continue
        if not _resolve_edges(block, schemas):
            event["detail"] = "skipped: conditions not two-sided column equalities"
            trace.append(event)
            continue

        # lexicographic relation order fixes bit positions and tie-breaks
        order = sorted(range(n), key=lambda i: block.labels[i])
        rows = [cost_model.cardinality(block.leaves[i]) for i in order]
        back = {new: old for new, old in enumerate(order)}
        fwd = {old: new for new, old in back.items()}
        edge_sels: dict[frozenset[int], float] = {}
        edge_conjuncts: dict[frozenset[int], list[Expr]] = {}
        for pair, conjuncts in block.edges.items():
            i, j = tuple(pair)
            key = frozenset((fwd[i], fwd[j]))
            sel = 1.0
            for conjunct in conjuncts:
                left_ds = cost_model.origin_dataset(block.leaves[i])
                right_ds = cost_model.origin_dataset(block.leaves[j])
                est = cost_model.analyzer.join_selectivity(conjunct, left_ds, right_ds)
                sel *= est.selectivity
            edge_sels[key] = sel
            edge_conjuncts[key] = list(conjuncts)

        result = dp_best_order(rows, edge_sels)
        if result is None:
            event["detail"] = "skipped: join graph disconnected"
            trace.append(event)
            continue
        tree, dp_cost, mask_costs = result

        card_cache: dict[int, float] = {}

        def cardinality(mask_old_bits: int) -> float:
            got = card_cache.get(mask_old_bits)
            if got is not None:
                return got
            value = 1.0
            for old in range(n):
                if mask_old_bits >> old & 1:
                    value *= cost_model.cardinality(block.leaves[old])
            for pair, sel in edge_sels.items():
                i_new, j_new = tuple(pair)
                if mask_old_bits >> back[i_new] & 1 and mask_old_bits >> back[j_new] & 1:
                    value *= sel
            card_cache[mask_old_bits] = value
            return value

        original_cost = _tree_cost_of_existing(block, cardinality)
        event["dp_cost"] = dp_cost
        event["original_cost"] = original_cost
        event["order"] = _render_tree(tree, [block.labels[back[i]] for i in range(n)])
        if dp_cost < original_cost - 1e-12:
            rebuilt = _rebuild(block, tree, back, edge_conjuncts)
            root = replace_node(root, block.root.node_id, rebuilt)
            event["replaced"] = True
        trace.append(event)
    return Plan(root=root), trace


def _render_tree(tree, labels) -> str:
    if isinstance(tree, int):
        return labels[tree]
    return f"({_render_tree(tree[0], labels)} x {_render_tree(tree[1], labels)})"


def _rebuild(block: JoinBlock, tree, back, edge_conjuncts) -> PlanNode:
    """Materialize the DP tree, reusing the original join node ids."""
    join_ids = sorted(j.node_id for j in block.joins)
    use_merge = all(j.op == Op.MERGE for j in block.joins)
    next_join = iter(join_ids)

    def mask_of(t) -> frozenset[int]:
        if isinstance(t, int):
            return frozenset((t,))
        return mask_of(t[0]) | mask_of(t[1])

    def build(t) -> PlanNode:
        if isinstance(t, int):
            return block.leaves[back[t]]
        left = build(t[0])
        right = build(t[1])
        lm, rm = mask_of(t[0]), mask_of(t[1])
        conjuncts: list[Expr] = []
        for pair, exprs in edge_conjuncts.items():
            i, j = tuple(pair)
            if (i in lm and j in rm) or (j in lm and i in rm):
                conjuncts.extend(exprs)
        conjuncts.sort(key=lambda e: json.dumps(expr_to_json(e), sort_keys=True))
        condition = conjuncts[0]
        for extra in conjuncts[1:]:
            condition = Call("and", (condition, extra))
        return PlanNode(
            node_id=next(next_join),
            op=Op.MERGE if use_merge else Op.JOIN,
            attrs={"mode": "inner", "condition": condition},
            children=(left, right),
        )

    return build(tree)


__all__ = ["JoinBlock", "dp_best_order", "find_blocks", "order_joins"]
