"""One object wiring providers, catalog, memory, planner, optimizer, executor.

The service layer and the command line both talk to AnalyticsEngine; neither
reaches into subsystems directly. Provider mode decides determinism: mock and
replay runs never touch the network.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .catalog import Catalog, DatasetProfile, FileConnector, ProfileReport, SqliteConnector
from .config import ProviderSettings, SystemConfig
from .errors import ConfigError, SemaflowError
from .executor import ExecSettings, ExecutionReport, Executor, Table
from .models import ModelSpec, load_registry, top_tier
from .memory import MemoryManager
from .optimizer import OptimizedPlan, optimize, uniform_assignment
from .plan_ir import Plan, PlanIssue, format_plan, parse_plan, validate_grammar
from .planner import TaskResult, TaskRunner, TemplateSet
from .provider import (
    ChatProvider,
    Embedder,
    FixtureStore,
    HashEmbedder,
    HttpChatProvider,
    HttpEmbedder,
    RecordingChatProvider,
    ReplayChatProvider,
    UsageCounter,
    make_mock_provider,
)

EXPLAIN_SECTIONS = ("PLAN", "REWRITES", "JOIN-ORDER", "MODELS", "COST")

# registry used when no model registry file is configured
DEFAULT_REGISTRY = [
    ModelSpec("default-small", 1e-06, 2e-06, 0.82, 1),
    ModelSpec("default-large", 1e-05, 2e-05, 0.95, 2),
]


def build_chat(settings: ProviderSettings, fixtures_dir: Path) -> ChatProvider:
    if settings.mode == "mock":
        return make_mock_provider()
    if settings.mode == "replay":
        return ReplayChatProvider(FixtureStore(fixtures_dir), strict=True)
    if settings.mode == "record":
        inner: ChatProvider
        if settings.endpoint:
            inner = HttpChatProvider(
                settings.endpoint, settings.api_key, timeout=settings.timeout
            )
        else:
            inner = make_mock_provider()
        return RecordingChatProvider(inner, FixtureStore(fixtures_dir))
    if settings.mode == "http":
        if not settings.endpoint:
            raise ConfigError("provider.mode http requires provider.endpoint")
        return HttpChatProvider(settings.endpoint, settings.api_key, timeout=settings.timeout)
    raise ConfigError(f"unknown provider mode: {settings.mode!r}")


def build_embedder(settings: ProviderSettings) -> Embedder:
    if settings.mode == "http" and settings.embed_endpoint:
        return HttpEmbedder(
            settings.embed_endpoint,
            settings.embed_model,
            settings.api_key,
            timeout=settings.timeout,
        )
    return HashEmbedder()


@dataclass
class AskOutcome:
    result: TaskResult
    explain: dict[str, list[str]] | None = None


@dataclass
class RunPlanOutcome:
    status: str  # "ok" | "invalid"
    issues: list[PlanIssue] = field(default_factory=list)
    plan: Plan | None = None
    table: Table | None = None
    report: ExecutionReport | None = None
    optimized: OptimizedPlan | None = None
    explain: dict[str, list[str]] | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


def explain_sections(
    optimized: OptimizedPlan, report: ExecutionReport | None = None
) -> dict[str, list[str]]:
    """The five explain blocks: PLAN, REWRITES, JOIN-ORDER, MODELS, COST."""
    ops = {n.node_id: n.op.value for n in optimized.plan.root.walk()}

    rewrites = []
    for ev in optimized.rewrite_trace:
        if not ev.applied:
            continue
        line = f"rule {ev.rule} at node {ev.node_id}: {ev.detail}"
        if ev.cost_before is not None and ev.cost_after is not None:
            line += f" (cost {ev.cost_before:.6g} -> {ev.cost_after:.6g})"
        rewrites.append(line)

    joins = []
    for ev in optimized.join_trace:
        head = f"block at node {ev['block_root']} [{', '.join(ev['relations'])}]"
        if "order" in ev:
            verdict = "applied" if ev["replaced"] else "kept original"
            joins.append(
                f"{head}: best order {ev['order']}, "
                f"cost {ev['dp_cost']:.6g} vs {ev['original_cost']:.6g}, {verdict}"
            )
        else:
            joins.append(f"{head}: {ev.get('detail', 'skipped')}")

    models = [
        f"node {node_id} ({ops.get(node_id, '?')}): {spec.model_name} "
        f"(tier {spec.tier}, quality {spec.quality:g})"
        for node_id, spec in sorted(optimized.assignment.items())
    ]
    for step in optimized.selection_steps:
        models.append(
            f"downgrade node {step.node_id}: tier {step.from_tier} -> tier {step.to_tier} "
            f"(saves {step.delta_cost:.6g}, quality cost {step.delta_quality:.4g})"
        )

    cost = [
        f"estimated before optimization: {optimized.cost_before.total_cost:.6g}",
        f"estimated after optimization: {optimized.cost_after.total_cost:.6g}",
    ]
    if report is not None:
        cost.append(
            f"incurred: {report.total_cost:.6g} ({report.total_calls} call(s), "
            f"{report.total_input_tokens} input / {report.total_output_tokens} output tokens)"
        )

    return {
        "PLAN": format_plan(optimized.plan).splitlines(),
        "REWRITES": rewrites or ["(none)"],
        "JOIN-ORDER": joins or ["(none)"],
        "MODELS": models or ["(none)"],
        "COST": cost,
    }


def render_explain(sections: dict[str, list[str]]) -> str:
    blocks = []
    for name in EXPLAIN_SECTIONS:
        lines = sections.get(name, ["(none)"])
        blocks.append("\n".join([name] + [f"  {line}" for line in lines]))
    return "\n".join(blocks)


class AnalyticsEngine:
    def __init__(
        self,
        config: SystemConfig,
        chat: ChatProvider | None = None,
        embedder: Embedder | None = None,
    ):
        self.config = config
        self.usage = UsageCounter()
        self.chat = chat or build_chat(config.provider, config.fixtures_dir)
        self.embedder = embedder or build_embedder(config.provider)
        self.registry = (
            load_registry(config.model_registry)
            if config.model_registry
            else list(DEFAULT_REGISTRY)
        )
        self.agent_model = config.provider.agent_model or top_tier(self.registry).model_name
        self.catalog = Catalog(
            config.catalog_store,
            self.embedder,
            chat=self.chat,
            agent_model=self.agent_model,
        )
        for spec in config.connectors:
            if spec.kind == "files":
                self.catalog.register_connector(FileConnector(spec.name, spec.locator))
            else:
                self.catalog.register_connector(SqliteConnector(spec.name, spec.locator))
        self.memory = MemoryManager(
            config.memory_store,
            self.embedder,
            chat=self.chat,
            agent_model=self.agent_model,
        )
        self.templates = TemplateSet(config.template_dir) if config.template_dir else TemplateSet()
        self.runner = TaskRunner(
            self.catalog,
            self.memory,
            self.chat,
            self.embedder,
            registry=self.registry,
            templates=self.templates,
            settings=config.planner,
            optimizer_config=config.optimizer,
            agent_model=self.agent_model,
            usage=self.usage,
        )

    # -- profiling ------------------------------------------------------------

    def profile(self, connector_names: list[str] | None = None) -> ProfileReport:
        return self.catalog.profile_all(connector_names)

    def datasets(self) -> list[DatasetProfile]:
        return self.catalog.profiles()

    def models(self) -> list[ModelSpec]:
        return list(self.registry)

    # -- asking ---------------------------------------------------------------

    def ask(self, query: str, max_iterations: int | None = None, explain: bool = False) -> AskOutcome:
        result = self.runner.run(query, max_iterations=max_iterations)
        sections = None
        if explain and result.optimized is not None:
            sections = explain_sections(result.optimized, result.report)
        return AskOutcome(result=result, explain=sections)

    # -- direct plan execution --------------------------------------------------

    def run_plan(
        self,
        document: str | bytes | dict,
        optimize_plan: bool = True,
        explain: bool = False,
    ) -> RunPlanOutcome:
        plan = parse_plan(document)
        issues = validate_grammar(plan, self.catalog)
        if issues:
            return RunPlanOutcome(status="invalid", issues=issues, plan=plan)

        optimized = None
        if optimize_plan:
            optimized = optimize(
                plan,
                source=self.catalog,
                chat=self.chat,
                embedder=self.embedder,
                registry=self.registry,
                config=self.config.optimizer,
            )
            final, assignment = optimized.plan, optimized.assignment
        else:
            final = plan
            assignment = uniform_assignment(plan, top_tier(self.registry))

        executor = Executor(
            self.catalog,
            chat=self.chat,
            embedder=self.embedder,
            registry=self.registry,
            assignment=assignment,
            settings=ExecSettings(),
        )
        table, report = executor.execute(final)
        sections = None
        if explain and optimized is not None:
            sections = explain_sections(optimized, report)
        return RunPlanOutcome(
            status="ok",
            plan=final,
            table=table,
            report=report,
            optimized=optimized,
            explain=sections,
        )

    # -- fixtures ---------------------------------------------------------------

    def verify_fixtures(self) -> list[str]:
        return FixtureStore(self.config.fixtures_dir).verify()


__all__ = [
    "DEFAULT_REGISTRY",
    "EXPLAIN_SECTIONS",
    "AnalyticsEngine",
    "AskOutcome",
    "RunPlanOutcome",
    "build_chat",
    "build_embedder",
    "explain_sections",
    "render_explain",
]
