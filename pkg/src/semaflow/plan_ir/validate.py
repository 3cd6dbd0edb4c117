"""Grammar validation: collect every static issue instead of raising.

Each issue carries the node id, the category tag "grammar", and a hint
sentence phrased so it can be pasted into a correction prompt.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import SemaflowError, UnknownDataset
from .infer import ProfileStore, _infer_node
from .nodes import ARITY, Op, Plan, PlanNode, arity_text
from .schema import Schema


@dataclass(frozen=True)
class PlanIssue:
    node_id: int
    category: str
    message: str
    hint: str


def validate_grammar(plan: Plan, store: ProfileStore) -> list[PlanIssue]:
    """All grammar-level issues in the plan; empty list means well-formed.

    An empty result guarantees infer_schema succeeds and the executor will
    not raise a schema error, except below opaque DBScan/Script nodes where
    only the connector can judge.
    """
    issues: list[PlanIssue] = []

    def check(node: PlanNode) -> Schema | None:
        child_schemas = [check(c) for c in node.children]
        lo, hi = ARITY[node.op]
        n = len(node.children)
        if n < lo or (hi is not None and n > hi):
            issues.append(
                PlanIssue(
                    node_id=node.node_id,
                    category="grammar",
                    message=f"ArityError: operator {node.op.value} at node "
                    f"{node.node_id} expects {arity_text(node.op)} children, got {n}",
                    hint=f"Give {node.op.value} {arity_text(node.op)} child node(s).",
                )
            )
            return None
        if any(s is None for s in child_schemas) and node.op not in (
            Op.FILE_SCAN,
            Op.DB_SCAN,
        ):
            # an opaque or already-broken child: only structural checks here
            try:
                return _infer_node(node, child_schemas, store)
            except SemaflowError as e:
                issues.append(_issue_from(node, e))
                return None
        try:
            return _infer_node(node, child_schemas, store)
        except UnknownDataset as e:
            issues.append(
                PlanIssue(
                    node_id=node.node_id,
                    category="grammar",
                    message=str(e),
                    hint="Only scan datasets that are present in the catalog; "
                    "check the dataset name spelling.",
                )
            )
            return None
        except SemaflowError as e:
            issues.append(_issue_from(node, e))
            return None

    check(plan.root)
    issues.sort(key=lambda i: (i.node_id, i.message))
    return issues


def _issue_from(node: PlanNode, err: SemaflowError) -> PlanIssue:
    name = type(err).__name__
    hints = {
        "UnknownColumn": "Ensure the columns referred in the expression exist "
        "in the input datasets at that point of the plan.",
        "TypeMismatch": "Make the expression operand types agree with the "
        "column types in the schema.",
        "DuplicateColumn": "Rename or project away one of the colliding "
        "columns before combining inputs.",
    }
    return PlanIssue(
        node_id=node.node_id,
        category="grammar",
        message=str(err),
        hint=hints.get(name, "Revise the operator's attributes so they fit the schema."),
    )
