"""Plan tree nodes and the operator taxonomy.

The operator set is closed: ten relational kinds, four semantic kinds, and
the opaque Script escape hatch. Join and Merge are aliases with identical
semantics (both carry a mode: inner, left, semi, anti); downstream code
treats them through one path.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterator, Mapping


class Op(str, Enum):
    FILE_SCAN = "FileScan"
    DB_SCAN = "DBScan"
    FILTER = "Filter"
    PROJECT = "Project"
    JOIN = "Join"
    AGGREGATE = "Aggregate"
    UNION = "Union"
    MERGE = "Merge"
    SORT = "Sort"
    LIMIT = "Limit"
    SEM_EXTRACT = "SemExtract"
    SEM_FILTER = "SemFilter"
    SEM_GROUP = "SemGroup"
    SEM_JOIN = "SemJoin"
    SCRIPT = "Script"


RELATIONAL_OPS = frozenset(
    {
        Op.FILE_SCAN,
        Op.DB_SCAN,
        Op.FILTER,
        Op.PROJECT,
        Op.JOIN,
        Op.AGGREGATE,
        Op.UNION,
        Op.MERGE,
        Op.SORT,
        Op.LIMIT,
    }
)

SEMANTIC_OPS = frozenset({Op.SEM_EXTRACT, Op.SEM_FILTER, Op.SEM_GROUP, Op.SEM_JOIN})

SCAN_OPS = frozenset({Op.FILE_SCAN, Op.DB_SCAN})

JOIN_LIKE_OPS = frozenset({Op.JOIN, Op.MERGE})

JOIN_MODES = ("inner", "left", "semi", "anti")

AGG_FUNCS = ("count", "sum", "avg", "min", "max")

SORT_DIRECTIONS = ("asc", "desc")

# Column appended by SemGroup.
GROUP_LABEL_COLUMN = "group_label"

# arity: (min_children, max_children); None = unbounded
ARITY: dict[Op, tuple[int, int | None]] = {
    Op.FILE_SCAN: (0, 0),
    Op.DB_SCAN: (0, 0),
    Op.FILTER: (1, 1),
    Op.PROJECT: (1, 1),
    Op.JOIN: (2, 2),
    Op.AGGREGATE: (1, 1),
    Op.UNION: (2, None),
    Op.MERGE: (2, 2),
    Op.SORT: (1, 1),
    Op.LIMIT: (1, 1),
    Op.SEM_EXTRACT: (1, 1),
    Op.SEM_FILTER: (1, 1),
    Op.SEM_GROUP: (1, 1),
    Op.SEM_JOIN: (2, 2),
    Op.SCRIPT: (1, 1),
}


def arity_text(op: Op) -> str:
    lo, hi = ARITY[op]
    if hi is None:
        return f"at least {lo}"
    if lo == hi:
        return f"exactly {lo}"
    return f"between {lo} and {hi}"


@dataclass(frozen=True)
class PlanNode:
    """One operator in a plan tree.

    ``attrs`` holds typed attribute values (Expr objects, tuples) keyed by
    name; treat it as immutable. Structural equality includes node_id, so
    equal trees serialize to identical bytes.
    """

    node_id: int
    op: Op
    attrs: Mapping[str, Any] = field(default_factory=dict)
    children: tuple["PlanNode", ...] = ()

    def walk(self) -> Iterator["PlanNode"]:
        """Depth-first, children before parents."""
        for child in self.children:
            yield from child.walk()
        yield self

    def find(self, node_id: int) -> "PlanNode | None":
        for node in self.walk():
            if node.node_id == node_id:
                return node
        return None

    def with_children(self, children: tuple["PlanNode", ...]) -> "PlanNode":
        return replace(self, children=children)

    def max_id(self) -> int:
        return max(n.node_id for n in self.walk())

    @property
    def is_semantic(self) -> bool:
        return self.op in SEMANTIC_OPS


@dataclass(frozen=True)
class Plan:
    """A complete plan document: version wrapper around the root node."""

    root: PlanNode
    version: int = 1

    def walk(self) -> Iterator[PlanNode]:
        return self.root.walk()

    def node(self, node_id: int) -> PlanNode | None:
        return self.root.find(node_id)


def replace_node(root: PlanNode, node_id: int, replacement: PlanNode | None) -> PlanNode:
    """Functionally replace the node with the given id.

    A None replacement splices the node out, promoting its single child;
    that is only legal for unary nodes.
    """
    if root.node_id == node_id:
        if replacement is None:
            if len(root.children) != 1:
                raise ValueError("can only splice out a unary node")
            return root.children[0]
        return replacement
    new_children = tuple(
        replace_node(c, node_id, replacement) for c in root.children
    )
    if new_children == root.children:
        return root
    return root.with_children(new_children)


OPERATOR_SUMMARIES = {
    Op.FILE_SCAN: "FileScan(dataset, format): read a profiled file dataset; no children.",
    Op.DB_SCAN: "DBScan(connector, sql_text): run opaque SQL on a connector; no children.",
    Op.FILTER: "Filter(predicate): keep rows where the boolean expression is true.",
    Op.PROJECT: "Project(items): compute the listed (name, expression) output columns.",
    Op.JOIN: "Join(mode, condition): combine two inputs; mode is inner/left/semi/anti.",
    Op.AGGREGATE: "Aggregate(keys, aggs): group by keys, apply count/sum/avg/min/max.",
    Op.UNION: "Union: concatenate two or more schema-identical inputs.",
    Op.MERGE: "Merge(mode, condition): alias of Join with identical semantics.",
    Op.SORT: "Sort(keys, directions): stable sort by the listed columns.",
    Op.LIMIT: "Limit(k): keep the first k rows.",
    Op.SEM_EXTRACT: (
        "SemExtract(source_columns, target_columns, instruction_prompt): "
        "derive new text columns from existing ones with a model."
    ),
    Op.SEM_FILTER: (
        "SemFilter(columns, predicate_prompt): keep rows a model judges to "
        "satisfy the natural-language predicate."
    ),
    Op.SEM_GROUP: (
        "SemGroup(columns, label_prompt, max_labels): append a model-chosen "
        f"'{GROUP_LABEL_COLUMN}' column."
    ),
    Op.SEM_JOIN: (
        "SemJoin(left_cols, right_cols, match_prompt): keep row pairs a model "
        "judges to match."
    ),
    Op.SCRIPT: "Script(code): opaque generated step; not optimized.",
}


def operator_catalog_text() -> str:
    """Human-readable operator list for planning prompts."""
    return "\n".join(f"- {OPERATOR_SUMMARIES[op]}" for op in Op)
