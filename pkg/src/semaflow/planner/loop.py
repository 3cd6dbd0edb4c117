"""The feedback loop that turns a question into an answer table.

Each iteration runs the full pipeline: recall memory, select datasets,
retrieve knowledge, generate a plan, validate its grammar, put it to the
validator vote, optimize, execute. Any stage failure is written to task
memory and the next iteration starts with that context in its prompts.
The loop never raises for in-task failures; after the iteration budget it
returns a FailureReport carrying every memory record of the task.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from ..catalog import Catalog
from ..errors import (
    ArityError,
    ConfigError,
    DecodeError,
    PreconditionError,
    SemaflowError,
    UnknownOperator,
)
from ..executor import ExecSettings, ExecutionReport, Executor, Table
from ..memory import MemoryManager
from ..models import ModelSpec, top_tier
from ..optimizer import OptimizedPlan, OptimizerConfig, optimize
from ..plan_ir import Plan, validate_grammar
from ..provider.base import ChatProvider, Embedder, UsageCounter
from .agents import AgentClient, TaskContext, generate_plan, select_datasets
from .prompts import TemplateSet
from .validation import DEFAULT_N_PER_KIND, validate_plan

PARSE_ERRORS = (DecodeError, UnknownOperator, ArityError)


@dataclass(frozen=True)
class PlannerSettings:
    max_iterations: int = 5
    n_per_kind: int = DEFAULT_N_PER_KIND
    reask_budget: int = 2
    knowledge_k: int = 5

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.n_per_kind < 1:
            raise ConfigError("n_per_kind must be >= 1")


@dataclass
class FailureReport:
    """Terminal value of an exhausted task: what went wrong, per record."""

    task_id: str
    query: str
    iterations: int
    message: str
    records: list[dict] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "task_id": self.task_id,
            "query": self.query,
            "iterations": self.iterations,
            "message": self.message,
            "records": self.records,
        }

    def transcript(self) -> str:
        lines = [f"task {self.task_id} failed after {self.iterations} iteration(s): {self.message}"]
        for r in self.records:
            where = f" node {r['node_id']}" if r.get("node_id") is not None else ""
            lines.append(f"- [iter {r['iteration']}] {r['category']}{where}: {r['message']}")
        return "\n".join(lines)


@dataclass
class TaskResult:
    status: str
    task_id: str
    query: str
    iterations: int
    answer: Table | None = None
    plan: Plan | None = None
    optimized: OptimizedPlan | None = None
    report: ExecutionReport | None = None
    failure: FailureReport | None = None
    events: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def task_id_for(query: str) -> str:
    return hashlib.sha256(query.strip().encode("utf-8")).hexdigest()[:12]


class TaskRunner:
    """Owns the agents and dependencies for running tasks against one catalog."""

    def __init__(
        self,
        catalog: Catalog,
        memory: MemoryManager,
        chat: ChatProvider,
        embedder: Embedder,
        registry: list[ModelSpec] | None = None,
        templates: TemplateSet | None = None,
        settings: PlannerSettings | None = None,
        optimizer_config: OptimizerConfig | None = None,
        exec_settings: ExecSettings | None = None,
        agent_model: str | None = None,
        usage: UsageCounter | None = None,
    ):
        if chat is None:
            raise ConfigError("the task loop needs a chat provider")
        self.catalog = catalog
        self.memory = memory
        self.chat = chat
        self.embedder = embedder
        self.registry = list(registry or [])
        self.templates = templates or TemplateSet()
        self.settings = settings or PlannerSettings()
        self.optimizer_config = optimizer_config or OptimizerConfig()
        self.exec_settings = exec_settings
        if agent_model is None:
            agent_model = top_tier(self.registry).model_name if self.registry else "default"
        self.client = AgentClient(chat, agent_model, usage)

    def _knowledge(self, query: str, level: str) -> list[dict]:
        try:
            return self.catalog.search(query, level=level, k=self.settings.knowledge_k)
        except SemaflowError:  # no segment collection yet: nothing to retrieve
            return []

    def run(self, query: str, max_iterations: int | None = None) -> TaskResult:
        if not query.strip():
            raise PreconditionError("the question is empty")
        if not self.catalog.connectors:
            raise PreconditionError("no connector is configured")
        budget = max_iterations if max_iterations is not None else self.settings.max_iterations
        if budget < 1:
            raise PreconditionError("max_iterations must be >= 1")

        task_id = task_id_for(query)
        self.memory.register_task(task_id, query)
        events: list[dict] = []
        result: TaskResult | None = None

        for iteration in range(1, budget + 1):

            def note(stage: str, detail: str):
                events.append({"iteration": iteration, "stage": stage, "detail": detail})

            def record(message: str, node_id: int | None = None, category: str | None = None):
                return self.memory.record(task_id, iteration, message, node_id, category)

            views = self.memory.retrieve(task_id, query)
            try:
                selected = select_datasets(
                    query,
                    self.catalog.profiles(),
                    self.templates,
                    client=self.client,
                    embedder=self.embedder,
                    views=views,
                    catalog=self.catalog,
                )
            except SemaflowError as e:
                record(str(e))
                note("select", str(e))
                continue
            note("select", ", ".join(p.name for p in selected))

            ctx = TaskContext(
                task_id=task_id,
                nl_query=query,
                selected_profiles=selected,
                knowledge_planning=self._knowledge(query, "coarse"),
                knowledge_manipulation=self._knowledge(query, "fine"),
                views=views,
                iteration=iteration,
                max_iterations=budget,
            )

            try:
                plan = generate_plan(
                    ctx,
                    self.templates,
                    self.client,
                    reask_budget=self.settings.reask_budget,
                    on_error=lambda message: record(message),
                )
            except PARSE_ERRORS as e:
                note("generate", str(e))  # each parse failure is already recorded
                continue
            except SemaflowError as e:
                record(str(e))
                note("generate", str(e))
                continue
            note("generate", f"plan with {len(list(plan.root.walk()))} nodes")

            issues = validate_grammar(plan, self.catalog)
            if issues:
                for issue in issues:
                    record(issue.message, node_id=issue.node_id, category=issue.category)
                note("grammar", f"{len(issues)} issue(s)")
                continue
            note("grammar", "clean")

            try:
                accepted, verdicts = validate_plan(
                    plan, ctx, self.templates, self.client, self.settings.n_per_kind
                )
            except SemaflowError as e:
                record(str(e))
                note("validate", str(e))
                continue
            if not accepted:
                for verdict in verdicts:
                    if not verdict.approved:
                        record(f"rejected by validators: {verdict.correction}")
                note("validate", f"{sum(v.approved for v in verdicts)}/{len(verdicts)} approvals")
                continue
            note("validate", f"{sum(v.approved for v in verdicts)}/{len(verdicts)} approvals")

            try:
                optimized = optimize(
                    plan,
                    source=self.catalog,
                    chat=self.chat,
                    embedder=self.embedder,
                    registry=self.registry,
                    config=self.optimizer_config,
                )
            except SemaflowError as e:
                record(str(e))
                note("optimize", str(e))
                continue
            note("optimize", f"cost {optimized.cost_after.total_cost:.6g}")

            executor = Executor(
                self.catalog,
                chat=self.chat,
                embedder=self.embedder,
                registry=self.registry,
                assignment=optimized.assignment,
                settings=self.exec_settings,
            )
            try:
                answer, report = executor.execute(optimized.plan)
            except SemaflowError as e:
                rec = record(str(e), node_id=getattr(e, "node_id", None))
                note("execute", f"[{rec.category}] {e}")
                continue
            note("execute", f"{len(answer)} row(s)")

            result = TaskResult(
                status="ok",
                task_id=task_id,
                query=query,
                iterations=iteration,
                answer=answer,
                plan=optimized.plan,
                optimized=optimized,
                report=report,
                events=events,
            )
            break

        if result is None:
            records = [
                {
                    "seq": r.seq,
                    "iteration": r.iteration,
                    "category": r.category,
                    "message": r.message,
                    "node_id": r.node_id,
                }
                for r in self.memory.active_records(task_id)
            ]
            failure = FailureReport(
                task_id=task_id,
                query=query,
                iterations=budget,
                message="no accepted plan executed within the iteration budget",
                records=records,
            )
            result = TaskResult(
                status="failed",
                task_id=task_id,
                query=query,
                iterations=budget,
                failure=failure,
                events=events,
            )

        # the task is over either way: expire its short-term records and
        # promote whatever clusters the buffer now holds
        self.memory.expire_task(task_id)
        self.memory.promote()
        return result


__all__ = [
    "FailureReport",
    "PlannerSettings",
    "TaskResult",
    "TaskRunner",
    "task_id_for",
]
