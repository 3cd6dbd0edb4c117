"""Plan wire format.

A plan document is ``{"version": 1, "root": <node>}`` where every node is
``{"id": int, "op": str, "attrs": {...}, "children": [...]}``. Serialization
is canonical: attribute keys sorted, compact separators, children in order.
Equal trees produce byte-identical documents.
"""

from __future__ import annotations

import json
from typing import Any

from ..errors import ArityError, DecodeError, UnknownOperator
from .expressions import Expr, expr_from_json, expr_to_json
from .nodes import (
    AGG_FUNCS,
    ARITY,
    JOIN_LIKE_OPS,
    JOIN_MODES,
    SORT_DIRECTIONS,
    Op,
    Plan,
    PlanNode,
    arity_text,
)

PLAN_VERSION = 1


def _need(attrs: dict, key: str, node_id: int):
    if key not in attrs:
        raise DecodeError(f"node {node_id}: missing attribute '{key}'")
    return attrs[key]


def _str_attr(attrs: dict, key: str, node_id: int) -> str:
    v = _need(attrs, key, node_id)
    if not isinstance(v, str):
        raise DecodeError(f"node {node_id}: attribute '{key}' must be a string")
    return v


def _str_list(attrs: dict, key: str, node_id: int, allow_empty: bool = False) -> tuple[str, ...]:
    v = _need(attrs, key, node_id)
    if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
        raise DecodeError(f"node {node_id}: attribute '{key}' must be a list of strings")
    if not v and not allow_empty:
        raise DecodeError(f"node {node_id}: attribute '{key}' must not be empty")
    return tuple(v)


def _decode_attrs(op: Op, raw: dict, node_id: int) -> dict[str, Any]:
    """Validate and type the raw attribute object for one operator."""
    if not isinstance(raw, dict):
        raise DecodeError(f"node {node_id}: attrs must be an object")
    if op == Op.FILE_SCAN:
        return {
            "dataset": _str_attr(raw, "dataset", node_id),
            "format": _str_attr(raw, "format", node_id),
        }
    if op == Op.DB_SCAN:
        return {
            "connector": _str_attr(raw, "connector", node_id),
            "sql_text": _str_attr(raw, "sql_text", node_id),
        }
    if op == Op.FILTER:
        return {"predicate": expr_from_json(_need(raw, "predicate", node_id))}
    if op == Op.PROJECT:
        items = _need(raw, "items", node_id)
        if not isinstance(items, list) or not items:
            raise DecodeError(f"node {node_id}: 'items' must be a non-empty list")
        out = []
        for item in items:
            if not (isinstance(item, list) and len(item) == 2 and isinstance(item[0], str)):
                raise DecodeError(
                    f"node {node_id}: each projection item is [name, expression]"
                )
            out.append((item[0], expr_from_json(item[1])))
        return {"items": tuple(out)}
    if op in JOIN_LIKE_OPS:
        mode = _str_attr(raw, "mode", node_id)
        if mode not in JOIN_MODES:
            raise DecodeError(f"node {node_id}: join mode '{mode}' not in {JOIN_MODES}")
        return {"mode": mode, "condition": expr_from_json(_need(raw, "condition", node_id))}
    if op == Op.AGGREGATE:
        keys = _str_list(raw, "keys", node_id, allow_empty=True)
        aggs_raw = _need(raw, "aggs", node_id)
        if not isinstance(aggs_raw, list):
            raise DecodeError(f"node {node_id}: 'aggs' must be a list")
        if not aggs_raw and not keys:
            raise DecodeError(f"node {node_id}: Aggregate needs keys or aggs")
        aggs = []
        for a in aggs_raw:
            if not (
                isinstance(a, list)
                and len(a) == 3
                and all(isinstance(x, str) for x in a)
            ):
                raise DecodeError(f"node {node_id}: each agg is [func, column, out_name]")
            func, column, out_name = a
            if func not in AGG_FUNCS:
                raise DecodeError(f"node {node_id}: agg func '{func}' not in {AGG_FUNCS}")
            aggs.append((func, column, out_name))
        return {"keys": keys, "aggs": tuple(aggs)}
    if op == Op.UNION:
        return {}
    if op == Op.SORT:
        keys = _str_list(raw, "keys", node_id)
        directions = _str_list(raw, "directions", node_id)
        if len(keys) != len(directions):
            raise DecodeError(f"node {node_id}: keys and directions differ in length")
        for d in directions:
            if d not in SORT_DIRECTIONS:
                raise DecodeError(f"node {node_id}: sort direction '{d}' not in {SORT_DIRECTIONS}")
        return {"keys": keys, "directions": directions}
    if op == Op.LIMIT:
        k = _need(raw, "k", node_id)
        if not isinstance(k, int) or isinstance(k, bool) or k < 0:
            raise DecodeError(f"node {node_id}: 'k' must be a non-negative integer")
        return {"k": k}
    if op == Op.SEM_EXTRACT:
        return {
            "source_columns": _str_list(raw, "source_columns", node_id),
            "target_columns": _str_list(raw, "target_columns", node_id),
            "instruction_prompt": _str_attr(raw, "instruction_prompt", node_id),
        }
    if op == Op.SEM_FILTER:
        return {
            "columns": _str_list(raw, "columns", node_id),
            "predicate_prompt": _str_attr(raw, "predicate_prompt", node_id),
        }
    if op == Op.SEM_GROUP:
        max_labels = _need(raw, "max_labels", node_id)
        if not isinstance(max_labels, int) or isinstance(max_labels, bool) or max_labels < 1:
            raise DecodeError(f"node {node_id}: 'max_labels' must be a positive integer")
        return {
            "columns": _str_list(raw, "columns", node_id),
            "label_prompt": _str_attr(raw, "label_prompt", node_id),
            "max_labels": max_labels,
        }
    if op == Op.SEM_JOIN:
        return {
            "left_cols": _str_list(raw, "left_cols", node_id),
            "right_cols": _str_list(raw, "right_cols", node_id),
            "match_prompt": _str_attr(raw, "match_prompt", node_id),
        }
    if op == Op.SCRIPT:
        return {"code": _str_attr(raw, "code", node_id)}
    raise UnknownOperator(op.value, node_id)


def _encode_attrs(node: PlanNode) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in node.attrs.items():
        if key == "predicate" or key == "condition":
            out[key] = expr_to_json(value)
        elif key == "items":
            out[key] = [[name, expr_to_json(expr)] for name, expr in value]
        elif key == "aggs":
            out[key] = [list(a) for a in value]
        elif isinstance(value, tuple):
            out[key] = list(value)
        else:
            out[key] = value
    return out


def _node_from_json(data, seen_ids: set[int]) -> PlanNode:
    if not isinstance(data, dict):
        raise DecodeError(f"plan node must be an object, got {type(data).__name__}")
    node_id = data.get("id")
    if not isinstance(node_id, int) or isinstance(node_id, bool):
        raise DecodeError(f"plan node needs an integer 'id', got {node_id!r}")
    if node_id in seen_ids:
        raise DecodeError(f"duplicate node id {node_id}")
    seen_ids.add(node_id)
    op_name = data.get("op")
    if not isinstance(op_name, str):
        raise DecodeError(f"node {node_id}: missing operator name")
    try:
        op = Op(op_name)
    except ValueError:
        raise UnknownOperator(op_name, node_id) from None
    children_raw = data.get("children", [])
    if not isinstance(children_raw, list):
        raise DecodeError(f"node {node_id}: 'children' must be a list")
    lo, hi = ARITY[op]
    if len(children_raw) < lo or (hi is not None and len(children_raw) > hi):
        raise ArityError(op.value, arity_text(op), len(children_raw), node_id)
    attrs = _decode_attrs(op, data.get("attrs", {}), node_id)
    children = tuple(_node_from_json(c, seen_ids) for c in children_raw)
    return PlanNode(node_id=node_id, op=op, attrs=attrs, children=children)


def _node_to_json(node: PlanNode) -> dict:
    return {
        "id": node.node_id,
        "op": node.op.value,
        "attrs": _encode_attrs(node),
        "children": [_node_to_json(c) for c in node.children],
    }


def parse_plan(document: str | bytes | dict) -> Plan:
    """Parse and fully validate the structure of a plan document.

    Accepts the JSON text or an already-decoded object. Raises DecodeError
    (with a byte offset for syntax errors), UnknownOperator, or ArityError.
    """
    if isinstance(document, (str, bytes)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as e:
            raise DecodeError(e.msg, offset=e.pos) from None
    else:
        data = document
    if not isinstance(data, dict):
        raise DecodeError("plan document must be a JSON object")
    version = data.get("version")
    if version != PLAN_VERSION:
        raise DecodeError(f"unsupported plan version {version!r}, expected {PLAN_VERSION}")
    if "root" not in data:
        raise DecodeError("plan document has no 'root'")
    root = _node_from_json(data["root"], set())
    return Plan(root=root, version=PLAN_VERSION)


def serialize_plan(plan: Plan) -> str:
    """Canonical serialization: sorted keys, compact, deterministic."""
    doc = {"version": plan.version, "root": _node_to_json(plan.root)}
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def plan_to_dict(plan: Plan) -> dict:
    return {"version": plan.version, "root": _node_to_json(plan.root)}


def format_plan(plan: Plan) -> str:
    """Indented one-line-per-node rendering for explain output and the repl."""
    lines: list[str] = []

    def walk(node: PlanNode, depth: int):
        attrs = _encode_attrs(node)
        attr_text = ", ".join(
            f"{k}={json.dumps(v, sort_keys=True, ensure_ascii=False)}" for k, v in sorted(attrs.items())
        )
        lines.append(f"{'  ' * depth}#{node.node_id} {node.op.value}({attr_text})")
        for child in node.children:
            walk(child, depth + 1)

    walk(plan.root, 0)
    return "\n".join(lines)
