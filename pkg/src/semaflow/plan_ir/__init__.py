"""Tree-structured plan intermediate representation."""

from .expressions import (
    Call,
    Col,
    Expr,
    Lit,
    ListLit,
    columns_in,
    eval_expr,
    expr_from_json,
    expr_to_json,
    infer_type,
)
from .infer import ProfileStore, infer_schema
from .nodes import (
    AGG_FUNCS,
    ARITY,
    GROUP_LABEL_COLUMN,
    JOIN_LIKE_OPS,
    JOIN_MODES,
    RELATIONAL_OPS,
    SCAN_OPS,
    SEMANTIC_OPS,
    Op,
    Plan,
    PlanNode,
    operator_catalog_text,
    replace_node,
)
from .schema import COLUMN_TYPES, Column, Schema
from .serialize import (
    PLAN_VERSION,
    format_plan,
    parse_plan,
    plan_to_dict,
    serialize_plan,
)
from .validate import PlanIssue, validate_grammar

__all__ = [
    "AGG_FUNCS",
    "ARITY",
    "COLUMN_TYPES",
    "Call",
    "Col",
    "Column",
    "Expr",
    "GROUP_LABEL_COLUMN",
    "JOIN_LIKE_OPS",
    "JOIN_MODES",
    "Lit",
    "ListLit",
    "Op",
    "PLAN_VERSION",
    "Plan",
    "PlanIssue",
    "PlanNode",
    "ProfileStore",
    "RELATIONAL_OPS",
    "SCAN_OPS",
    "SEMANTIC_OPS",
    "Schema",
    "columns_in",
    "eval_expr",
    "expr_from_json",
    "expr_to_json",
    "format_plan",
    "infer_schema",
    "infer_type",
    "operator_catalog_text",
    "parse_plan",
    "plan_to_dict",
    "replace_node",
    "serialize_plan",
    "validate_grammar",
]
