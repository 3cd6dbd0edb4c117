"""Majority-vote plan validation.

Two validator kinds look at every plan: completeness validators check
that the plan covers the whole task, guideline validators check its logic
against retrieved manual excerpts. Each kind runs n times with its index
rendered into the prompt, so the calls stay distinct at temperature 0.
The plan is accepted only when strictly more than half of all verdicts
approve; a failed provider call counts as a rejection with the failure
text as its correction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from ..errors import ProviderError
from ..plan_ir import Plan, plan_to_dict
from .agents import AgentClient, TaskContext
from .prompts import TemplateSet, knowledge_lines, profile_lines

VALIDATOR_KINDS = ("completeness", "guideline")
DEFAULT_N_PER_KIND = 3


@dataclass(frozen=True)
class ValidationVerdict:
    validator_kind: str
    approved: bool
    correction: str

    def __post_init__(self):
        if self.approved and self.correction:
            raise ValueError("an approving verdict carries no correction")
        if not self.approved and not self.correction:
            raise ValueError("a rejecting verdict must carry a correction")


def is_approval(text: str) -> bool:
    """First word, case-insensitive, equals APPROVE."""
    words = text.split()
    return bool(words) and words[0].strip(".,!:;").upper() == "APPROVE"


def validate_plan(
    plan: Plan,
    ctx: TaskContext,
    templates: TemplateSet,
    client: AgentClient,
    n_per_kind: int = DEFAULT_N_PER_KIND,
) -> tuple[bool, list[ValidationVerdict]]:
    """(accepted, every verdict); accepted iff approvals > half of 2n."""
    plan_text = json.dumps(plan_to_dict(plan), indent=2, sort_keys=True)
    verdicts: list[ValidationVerdict] = []
    for kind in VALIDATOR_KINDS:
        for index in range(1, n_per_kind + 1):
            slots = {
                "task": ctx.nl_query,
                "plan": plan_text,
                "index": index,
                "total": n_per_kind,
            }
            if kind == "completeness":
                slots["profiles"] = profile_lines(ctx.selected_profiles)
            else:
                slots["knowledge"] = knowledge_lines(ctx.knowledge_manipulation)
            try:
                text = client.call(templates.render(f"validator_{kind}", **slots))
            except ProviderError as e:
                verdicts.append(ValidationVerdict(kind, False, str(e)))
                continue
            if is_approval(text):
                verdicts.append(ValidationVerdict(kind, True, ""))
            else:
                correction = text.strip() or f"{kind} validator {index} gave no reason"
                verdicts.append(ValidationVerdict(kind, False, correction))
    approvals = sum(1 for v in verdicts if v.approved)
    accepted = approvals * 2 > len(verdicts)
    return accepted, verdicts


__all__ = [
    "DEFAULT_N_PER_KIND",
    "VALIDATOR_KINDS",
    "ValidationVerdict",
    "is_approval",
    "validate_plan",
]
