"""Dataset selection and plan generation agents.

Every agent call goes through one AgentClient so temperature stays pinned
at 0 and usage is tallied in one place. Plan generation is two calls: the
planning agent writes a step sketch, the manipulation agent turns it into
plan JSON. A plan document that fails to parse is fed back into the next
attempt verbatim, up to a fixed re-ask budget.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Callable

from ..catalog import Catalog, DatasetProfile
from ..errors import NoCandidate, PreconditionError, SemaflowError
from ..memory import MemoryViews
from ..plan_ir import Plan, operator_catalog_text, parse_plan
from ..provider.base import ChatProvider, ChatRequest, Embedder, UsageCounter
from .prompts import TemplateSet, knowledge_lines, profile_lines, tool_lines

REASK_BUDGET = 2
FALLBACK_TOP_K = 3


class AgentClient:
    """Chat access for agents: one model, temperature 0, shared tally."""

    def __init__(self, chat: ChatProvider, model: str, usage: UsageCounter | None = None):
        self.chat = chat
        self.model = model
        self.usage = usage if usage is not None else UsageCounter()

    def call(self, prompt: str) -> str:
        response = self.chat.chat(ChatRequest(model=self.model, prompt=prompt, temperature=0.0))
        self.usage.add(self.model, response)
        return response.text


@dataclass
class TaskContext:
    """Everything one iteration's agents are allowed to see."""

    task_id: str
    nl_query: str
    selected_profiles: list[DatasetProfile]
    knowledge_planning: list[dict] = field(default_factory=list)
    knowledge_manipulation: list[dict] = field(default_factory=list)
    views: MemoryViews = field(default_factory=MemoryViews)
    iteration: int = 1
    max_iterations: int = 5

    def __post_init__(self):
        if self.iteration > self.max_iterations:
            raise PreconditionError(
                f"iteration {self.iteration} exceeds max_iterations {self.max_iterations}"
            )


def _json_array(text: str) -> list:
    start, end = text.find("["), text.rfind("]")
    if start < 0 or end <= start:
        raise ValueError("no JSON array in the response")
    return json.loads(text[start : end + 1])


def select_datasets(
    query: str,
    profiles: list[DatasetProfile],
    templates: TemplateSet,
    client: AgentClient | None = None,
    embedder: Embedder | None = None,
    views: MemoryViews | None = None,
    catalog: Catalog | None = None,
) -> list[DatasetProfile]:
    """The planning agent's dataset choice; embedding ranking without a provider.

    Raises NoCandidate when the agent names nothing usable, PreconditionError
    when no profiles are registered at all.
    """
    if not profiles:
        raise PreconditionError("no datasets are profiled; run profiling first")
    by_name = {p.name: p for p in profiles}

    if client is None:
        if embedder is None:
            raise PreconditionError("dataset selection needs a chat provider or an embedder")
        texts = [p.summary or p.name for p in profiles]
        vectors = embedder.embed([query] + texts)
        qv = vectors[0]
        scored = sorted(
            ((float(vectors[i + 1] @ qv), p.name) for i, p in enumerate(profiles)),
            key=lambda pair: (-pair[0], pair[1]),
        )
        return [by_name[name] for _, name in scored[:FALLBACK_TOP_K]]

    transcript = "\n".join(f"- {line}" for line in (views.planning if views else [])) or "(none)"
    prompt = templates.render(
        "selection",
        task=query,
        profiles=profile_lines(profiles),
        tools=tool_lines(catalog.describe_connectors() if catalog else []),
        memory=transcript,
    )
    text = client.call(prompt)
    try:
        names = _json_array(text)
    except (ValueError, json.JSONDecodeError) as e:
        raise NoCandidate(f"NoCandidate: unreadable dataset selection ({e})") from None
    chosen: list[DatasetProfile] = []
    for name in names:
        profile = by_name.get(str(name))
        if profile is not None and profile not in chosen:
            chosen.append(profile)
    if not chosen:
        raise NoCandidate("NoCandidate: no dataset matches the question")
    return chosen


def generate_plan(
    ctx: TaskContext,
    templates: TemplateSet,
    client: AgentClient,
    reask_budget: int = REASK_BUDGET,
    on_error: Callable[[str], None] | None = None,
) -> Plan:
    """Sketch then manipulate; re-ask on undecodable output, then give up.

    Raises PreconditionError on a blank query or empty dataset selection,
    and the last DecodeError once the re-ask budget is spent.
    """
    if not ctx.nl_query.strip():
        raise PreconditionError("the question is empty")
    if not ctx.selected_profiles:
        raise PreconditionError("no datasets selected for the task")

    profiles = profile_lines(ctx.selected_profiles)
    sketch = client.call(
        templates.render(
            "sketch",
            task=ctx.nl_query,
            profiles=profiles,
            knowledge=knowledge_lines(ctx.knowledge_planning),
            memory="\n".join(f"- {m}" for m in ctx.views.planning) or "(none)",
        )
    )

    attempts: list[str] = []
    last_error: SemaflowError | None = None
    for _ in range(1 + reask_budget):
        prompt = templates.render(
            "manipulation",
            task=ctx.nl_query,
            profiles=profiles,
            operators=operator_catalog_text(),
            sketch=sketch,
            knowledge=knowledge_lines(ctx.knowledge_manipulation),
            memory="\n".join(f"- {m}" for m in ctx.views.manipulation) or "(none)",
            errors="\n".join(attempts) or "(none)",
        )
        text = client.call(prompt)
        start, end = text.find("{"), text.rfind("}")
        document = text[start : end + 1] if 0 <= start < end else text
        try:
            return parse_plan(document)
        except SemaflowError as e:
            last_error = e
            attempts.append(f"- rejected output: {document[:200]}\n  reason: {e}")
            if on_error is not None:
                on_error(str(e))
    assert last_error is not None
    raise last_error


__all__ = [
    "AgentClient",
    "FALLBACK_TOP_K",
    "REASK_BUDGET",
    "TaskContext",
    "generate_plan",
    "select_datasets",
]
