"""Schema inference over plan trees.

Walks bottom-up and computes the output schema of every node against a
profile store. DBScan and Script outputs are opaque (None): DBScan SQL is
validated only by its connector, and Script is generated code. Checks that
would need an opaque schema are skipped, so static guarantees stop at those
nodes.
"""

from __future__ import annotations

from typing import Protocol

from ..errors import DuplicateColumn, TypeMismatch, UnknownColumn
from .expressions import columns_in, infer_type
from .nodes import GROUP_LABEL_COLUMN, Op, Plan, PlanNode
from .schema import Column, NUMERIC_TYPES, Schema


class ProfileStore(Protocol):
    """What inference needs from a catalog."""

    def schema_of(self, dataset: str) -> Schema: ...


def infer_schema(plan: Plan, store: ProfileStore) -> dict[int, Schema | None]:
    """Output schema per node id; None marks an opaque schema.

    Raises UnknownDataset, UnknownColumn, TypeMismatch, or DuplicateColumn
    on the first inconsistency.
    """
    out: dict[int, Schema | None] = {}

    def infer(node: PlanNode) -> Schema | None:
        schema = _infer_node(node, [infer(c) for c in node.children], store)
        out[node.node_id] = schema
        return schema

    infer(plan.root)
    return out


def _require_boolean(expr, schema: Schema, node_id: int):
    t = infer_type(expr, schema, node_id)
    if t != "boolean":
        raise TypeMismatch(f"predicate must be boolean, got {t}", node_id)


def _check_no_duplicates(names: list[str], node_id: int):
    seen = set()
    for n in names:
        if n in seen:
            raise DuplicateColumn(n, node_id)
        seen.add(n)


def _infer_node(
    node: PlanNode, child_schemas: list[Schema | None], store: ProfileStore
) -> Schema | None:
    op = node.op
    nid = node.node_id

    if op == Op.FILE_SCAN:
        return store.schema_of(node.attrs["dataset"])
    if op == Op.DB_SCAN:
        return None  # opaque: the connector is the only authority on this SQL
    if op == Op.SCRIPT:
        return None

    if op == Op.FILTER:
        schema = child_schemas[0]
        if schema is not None:
            _require_boolean(node.attrs["predicate"], schema, nid)
        return schema

    if op == Op.PROJECT:
        schema = child_schemas[0]
        names = [name for name, _ in node.attrs["items"]]
        _check_no_duplicates(names, nid)
        if schema is None:
            return None
        cols = []
        for name, expr in node.attrs["items"]:
            cols.append(Column(name, infer_type(expr, schema, nid)))
        return Schema(tuple(cols))

    if op in (Op.JOIN, Op.MERGE):
        left, right = child_schemas
        if left is None or right is None:
            return None
        combined = left.concat(right)
        _check_no_duplicates(list(combined.names()), nid)
        _require_boolean(node.attrs["condition"], combined, nid)
        mode = node.attrs["mode"]
        if mode in ("semi", "anti"):
            return left
        return combined

    if op == Op.AGGREGATE:
        schema = child_schemas[0]
        keys = node.attrs["keys"]
        aggs = node.attrs["aggs"]
        out_names = list(keys) + [out for _, _, out in aggs]
        _check_no_duplicates(out_names, nid)
        if schema is None:
            return None
        cols = [Column(k, schema.type_of(k, nid)) for k in keys]
        for func, column, out_name in aggs:
            if column == "*":
                if func != "count":
                    raise TypeMismatch(f"{func}(*) is not defined, only count(*)", nid)
                cols.append(Column(out_name, "integer"))
                continue
            ctype = schema.type_of(column, nid)
            if func == "count":
                cols.append(Column(out_name, "integer"))
            elif func in ("sum", "avg"):
                if ctype not in NUMERIC_TYPES:
                    raise TypeMismatch(f"{func} over non-numeric column '{column}'", nid)
                cols.append(Column(out_name, "real" if func == "avg" else ctype))
            else:  # min / max keep the column type
                cols.append(Column(out_name, ctype))
        return Schema(tuple(cols))

    if op == Op.UNION:
        known = [s for s in child_schemas if s is not None]
        if not known:
            return None
        first = known[0]
        for s in known[1:]:
            if s != first:
                raise TypeMismatch(
                    f"Union inputs disagree: {list(first.names())} vs {list(s.names())}",
                    nid,
                )
        return first if len(known) == len(child_schemas) else None

    if op == Op.SORT:
        schema = child_schemas[0]
        if schema is not None:
            for k in node.attrs["keys"]:
                schema.type_of(k, nid)
        return schema

    if op == Op.LIMIT:
        return child_schemas[0]

    if op == Op.SEM_EXTRACT:
        schema = child_schemas[0]
        if schema is None:
            return None
        for c in node.attrs["source_columns"]:
            schema.type_of(c, nid)
        names = list(schema.names()) + list(node.attrs["target_columns"])
        _check_no_duplicates(names, nid)
        extra = tuple(Column(t, "text") for t in node.attrs["target_columns"])
        return Schema(schema.columns + extra)

    if op == Op.SEM_FILTER:
        schema = child_schemas[0]
        if schema is not None:
            for c in node.attrs["columns"]:
                schema.type_of(c, nid)
        return schema

    if op == Op.SEM_GROUP:
        schema = child_schemas[0]
        if schema is None:
            return None
        for c in node.attrs["columns"]:
            schema.type_of(c, nid)
        names = list(schema.names()) + [GROUP_LABEL_COLUMN]
        _check_no_duplicates(names, nid)
        return Schema(schema.columns + (Column(GROUP_LABEL_COLUMN, "text"),))

    if op == Op.SEM_JOIN:
        left, right = child_schemas
        if left is not None:
            for c in node.attrs["left_cols"]:
                left.type_of(c, nid)
        if right is not None:
            for c in node.attrs["right_cols"]:
                right.type_of(c, nid)
        if left is None or right is None:
            return None
        combined = left.concat(right)
        _check_no_duplicates(list(combined.names()), nid)
        return combined

    raise UnknownColumn(f"unhandled operator {op}", nid)  # pragma: no cover
