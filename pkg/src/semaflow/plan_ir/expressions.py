"""Expression trees for predicates and projections.

Grammar: comparisons (==, !=, <, <=, >, >=), membership (in), boolean
connectives (and, or, not) and arithmetic (+, -, *, /). Leaves are column
references or typed literals. List literals are only legal as the right
operand of `in`.

Null handling is two-valued, not SQL ternary: a comparison or membership
test with a None operand is False, arithmetic with None yields None, and
`not False` is True. Left joins are where Nones enter.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any, Union

from ..errors import DecodeError, TypeMismatch, UnknownColumn
from .schema import NUMERIC_TYPES, Schema

COMPARISONS = ("==", "!=", "<", "<=", ">", ">=")
BOOL_OPS = ("and", "or")
ARITH_OPS = ("+", "-", "*", "/")
ALL_OPS = COMPARISONS + BOOL_OPS + ARITH_OPS + ("in", "not")

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


@dataclass(frozen=True)
class Col:
    name: str


@dataclass(frozen=True)
class Lit:
    value: Any
    type: str


@dataclass(frozen=True)
class ListLit:
    values: tuple
    elem_type: str


@dataclass(frozen=True)
class Call:
    op: str
    args: tuple["Expr", ...]


Expr = Union[Col, Lit, ListLit, Call]


def _check_literal(value, type_: str):
    ok = {
        "integer": lambda v: isinstance(v, int) and not isinstance(v, bool),
        "real": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
        "boolean": lambda v: isinstance(v, bool),
        "text": lambda v: isinstance(v, str),
        "date": lambda v: isinstance(v, str) and _DATE_RE.match(v),
    }.get(type_)
    if ok is None:
        raise DecodeError(f"unknown literal type '{type_}'")
    if not ok(value):
        raise DecodeError(f"literal {value!r} does not fit type '{type_}'")


def expr_from_json(data) -> Expr:
    """Decode the wire form of an expression. Raises DecodeError."""
    if not isinstance(data, dict):
        raise DecodeError(f"expression must be an object, got {type(data).__name__}")
    if "col" in data:
        if not isinstance(data["col"], str):
            raise DecodeError("column reference must be a string")
        return Col(data["col"])
    if "lit" in data:
        type_ = data.get("type")
        _check_literal(data["lit"], type_)
        value = data["lit"]
        if type_ == "real":
            value = float(value)
        return Lit(value, type_)
    if "list" in data:
        items = data["list"]
        if not isinstance(items, list):
            raise DecodeError("list literal must carry an array")
        elem_type = data.get("type", "text" if not items else None)
        if elem_type is None:
            first = items[0]
            if isinstance(first, bool):
                elem_type = "boolean"
            elif isinstance(first, int):
                elem_type = "integer"
            elif isinstance(first, float):
                elem_type = "real"
            else:
                elem_type = "text"
        for v in items:
            _check_literal(v, elem_type)
        return ListLit(tuple(items), elem_type)
    if "op" in data:
        op = data["op"]
        if op not in ALL_OPS:
            raise DecodeError(f"unknown expression operator '{op}'")
        args = data.get("args")
        if not isinstance(args, list):
            raise DecodeError(f"operator '{op}' needs an args array")
        want = 1 if op == "not" else 2
        if len(args) != want:
            raise DecodeError(f"operator '{op}' takes {want} operands, got {len(args)}")
        return Call(op, tuple(expr_from_json(a) for a in args))
    raise DecodeError(f"expression object needs one of col/lit/list/op: {data!r}")


def expr_to_json(expr: Expr):
    if isinstance(expr, Col):
        return {"col": expr.name}
    if isinstance(expr, Lit):
        return {"lit": expr.value, "type": expr.type}
    if isinstance(expr, ListLit):
        return {"list": list(expr.values), "type": expr.elem_type}
    if isinstance(expr, Call):
        return {"op": expr.op, "args": [expr_to_json(a) for a in expr.args]}
    raise TypeError(f"not an expression: {expr!r}")


def columns_in(expr: Expr) -> set[str]:
    if isinstance(expr, Col):
        return {expr.name}
    if isinstance(expr, Call):
        out: set[str] = set()
        for a in expr.args:
            out |= columns_in(a)
        return out
    return set()


def _comparable(a: str, b: str) -> bool:
    if a == b:
        return True
    return a in NUMERIC_TYPES and b in NUMERIC_TYPES


def infer_type(expr: Expr, schema: Schema, node_id: int | None = None) -> str:
    """Type of the expression against the schema.

    Raises UnknownColumn or TypeMismatch. List literals have no standalone
    type; they are rejected anywhere except as the right side of `in`.
    """
    if isinstance(expr, Col):
        return schema.type_of(expr.name, node_id)
    if isinstance(expr, Lit):
        return expr.type
    if isinstance(expr, ListLit):
        raise TypeMismatch(
            "a list literal is only allowed as the right operand of 'in'", node_id
        )
    op = expr.op
    if op == "in":
        lhs, rhs = expr.args
        left_t = infer_type(lhs, schema, node_id)
        if not isinstance(rhs, ListLit):
            raise TypeMismatch("right operand of 'in' must be a list literal", node_id)
        if not rhs.values:
            raise TypeMismatch(
                "comparison operand types: 'in' against an empty list", node_id
            )
        if not _comparable(left_t, rhs.elem_type):
            raise TypeMismatch(
                f"comparison operand types {left_t} and list of {rhs.elem_type}", node_id
            )
        return "boolean"
    arg_types = [infer_type(a, schema, node_id) for a in expr.args]
    if op in COMPARISONS:
        a, b = arg_types
        if not _comparable(a, b):
            raise TypeMismatch(f"comparison operand types {a} and {b}", node_id)
        if op not in ("==", "!=") and a not in NUMERIC_TYPES and a not in ("text", "date"):
            raise TypeMismatch(f"ordering comparison on type {a}", node_id)
        return "boolean"
    if op in BOOL_OPS:
        for t in arg_types:
            if t != "boolean":
                raise TypeMismatch(f"'{op}' needs boolean operands, got {t}", node_id)
        return "boolean"
    if op == "not":
        if arg_types[0] != "boolean":
            raise TypeMismatch(f"'not' needs a boolean operand, got {arg_types[0]}", node_id)
        return "boolean"
    if op in ARITH_OPS:
        a, b = arg_types
        if a not in NUMERIC_TYPES or b not in NUMERIC_TYPES:
            raise TypeMismatch(f"arithmetic operand types {a} and {b}", node_id)
        if op == "/":
            return "real"
        return "integer" if a == b == "integer" else "real"
    raise TypeMismatch(f"unknown operator '{op}'", node_id)


def eval_expr(expr: Expr, row: dict[str, Any]):
    """Evaluate against a row mapping column name -> value."""
    if isinstance(expr, Col):
        return row[expr.name]
    if isinstance(expr, Lit):
        return expr.value
    if isinstance(expr, ListLit):
        return expr.values
    op = expr.op
    if op == "not":
        return not _truthy(eval_expr(expr.args[0], row))
    if op == "and":
        return _truthy(eval_expr(expr.args[0], row)) and _truthy(eval_expr(expr.args[1], row))
    if op == "or":
        return _truthy(eval_expr(expr.args[0], row)) or _truthy(eval_expr(expr.args[1], row))
    left = eval_expr(expr.args[0], row)
    right = eval_expr(expr.args[1], row)
    if op == "in":
        if left is None:
            return False
        return left in right
    if op in COMPARISONS:
        if left is None or right is None:
            return False
        if op == "==":
            return left == right
        if op == "!=":
            return left != right
        if op == "<":
            return left < right
        if op == "<=":
            return left <= right
        if op == ">":
            return left > right
        return left >= right
    # arithmetic
    if left is None or right is None:
        return None
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    return left / right


def _truthy(value) -> bool:
    return bool(value) if value is not None else False
