"""Prompt shapes for per-row semantic operator calls.

Both the executor and the cost estimator build prompts from these helpers,
so estimated token counts line up with what a call actually sends. Every
prompt is a plain concatenation head + variable + tail: the head and tail
depend only on the operator's attributes, the variable part only on row
values.

The deterministic mock provider parses these same shapes, which is why the
formats live in one module.
"""

from __future__ import annotations

from .plan_ir import GROUP_LABEL_COLUMN, Op, PlanNode

AFFIRMATIVES = {"yes", "true", "keep"}


def is_affirmative(text: str) -> bool:
    """First non-blank word, case-insensitive, in {yes, true, keep}."""
    words = text.split()
    return bool(words) and words[0].strip(".,!:;").lower() in AFFIRMATIVES


def values_text(columns, values) -> str:
    return "\n".join(f"{c}={_show(v)}" for c, v in zip(columns, values))


def _show(value) -> str:
    if value is None:
        return ""
    return str(value)


def extract_is_pairwise(node: PlanNode) -> bool:
    """Aligned extraction: source i feeds target i."""
    return len(node.attrs["source_columns"]) == len(node.attrs["target_columns"])


def static_parts(node: PlanNode) -> tuple[str, str]:
    """(head, tail) surrounding the row-dependent text for a semantic node."""
    op = node.op
    if op == Op.SEM_FILTER:
        head = (
            "Decide whether the row satisfies the condition.\n"
            f"Condition: {node.attrs['predicate_prompt']}\n"
            "VALUES:\n"
        )
        return head, "\nAnswer yes or no."
    if op == Op.SEM_EXTRACT:
        targets = node.attrs["target_columns"]
        if extract_is_pairwise(node):
            head = (
                "Extract the requested fields from the row.\n"
                f"Instruction: {node.attrs['instruction_prompt']}\n"
                "TARGETS:\n"
            )
        else:
            head = (
                "Extract the requested fields from the row.\n"
                f"Instruction: {node.attrs['instruction_prompt']}\n"
                f"TARGETS: {', '.join(targets)}\n"
                "VALUES:\n"
            )
        return head, "\nRespond with one line per target as 'name: value'."
    if op == Op.SEM_GROUP:
        head = (
            "Assign one short label to the row "
            f"(use at most {node.attrs['max_labels']} distinct labels across all rows).\n"
            f"Topic: {node.attrs['label_prompt']}\n"
            "VALUES:\n"
        )
        return head, "\nRespond with the label only."
    if op == Op.SEM_JOIN:
        head = (
            "Decide whether the two rows match.\n"
            f"Criterion: {node.attrs['match_prompt']}\n"
            "LEFT:\n"
        )
        return head, "\nAnswer yes or no."
    raise ValueError(f"not a semantic operator: {op}")


def variable_text(node: PlanNode, row_values: dict) -> str:
    """The row-dependent middle of the prompt."""
    op = node.op
    if op == Op.SEM_FILTER:
        return values_text(
            node.attrs["columns"], [row_values[c] for c in node.attrs["columns"]]
        )
    if op == Op.SEM_EXTRACT:
        sources = node.attrs["source_columns"]
        targets = node.attrs["target_columns"]
        if extract_is_pairwise(node):
            return "\n".join(
                f"{t} <- {s}={_show(row_values[s])}" for t, s in zip(targets, sources)
            )
        return values_text(sources, [row_values[s] for s in sources])
    if op == Op.SEM_GROUP:
        return values_text(
            node.attrs["columns"], [row_values[c] for c in node.attrs["columns"]]
        )
    raise ValueError(f"no single-row variable text for {op}")


def join_variable_text(node: PlanNode, left_values: dict, right_values: dict) -> str:
    left = values_text(
        node.attrs["left_cols"], [left_values[c] for c in node.attrs["left_cols"]]
    )
    right = values_text(
        node.attrs["right_cols"], [right_values[c] for c in node.attrs["right_cols"]]
    )
    return f"{left}\nRIGHT:\n{right}"


def render(node: PlanNode, variable: str) -> str:
    head, tail = static_parts(node)
    return head + variable + tail


def parse_extract_response(text: str, targets) -> dict[str, str]:
    """Parse 'name: value' lines; a missing target maps to empty text."""
    found: dict[str, str] = {}
    for line in text.splitlines():
        if ":" not in line:
            continue
        name, _, value = line.partition(":")
        name = name.strip()
        if name in targets and name not in found:
            found[name] = value.strip()
    return {t: found.get(t, "") for t in targets}


__all__ = [
    "AFFIRMATIVES",
    "GROUP_LABEL_COLUMN",
    "is_affirmative",
    "values_text",
    "extract_is_pairwise",
    "static_parts",
    "variable_text",
    "join_variable_text",
    "render",
    "parse_extract_response",
]
