"""The three-step optimization pipeline: rewrites, join order, assignment."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ConfigError
from ..models import ModelSpec, validate_registry
from ..plan_ir import Plan
from ..provider.base import ChatProvider, Embedder
from .config import OptimizerConfig
from .cost import CostModel, PlanCost, uniform_assignment
from .join_order import order_joins
from .rules import RewriteEvent, apply_rules
from .selection import SelectionStep, select_models
from .selectivity import SelectivityAnalyzer


@dataclass
class OptimizedPlan:
    plan: Plan
    assignment: dict[int, ModelSpec]
    cost_before: PlanCost
    cost_after: PlanCost
    rewrite_trace: list[RewriteEvent] = field(default_factory=list)
    join_trace: list[dict] = field(default_factory=list)
    selection_steps: list[SelectionStep] = field(default_factory=list)
    selectivities: dict = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)


def optimize(
    plan: Plan,
    source=None,
    chat: ChatProvider | None = None,
    embedder: Embedder | None = None,
    registry: list[ModelSpec] | None = None,
    config: OptimizerConfig | None = None,
) -> OptimizedPlan:
    cfg = config or OptimizerConfig()
    has_semantic = any(n.is_semantic for n in plan.root.walk())
    models = validate_registry(list(registry)) if registry else []
    if has_semantic and not models:
        raise ConfigError("plan has semantic operators but the model registry is empty")

    analyzer = SelectivityAnalyzer(
        source=source, chat=chat, embedder=embedder, registry=models, config=cfg
    )
    cost_model = CostModel(source=source, analyzer=analyzer, embedder=embedder, config=cfg)
    top = models[-1] if models else None

    cost_before = cost_model.estimate(plan, uniform_assignment(plan, top) if top else {})

    if top is not None:
        plan, rewrite_trace = apply_rules(
            plan, cost_model=cost_model, model=top, max_passes=cfg.max_rule_passes
        )
    else:
        rewrite_trace = []

    plan, join_trace = order_joins(plan, cost_model, max_relations=cfg.join_dp_max_relations)

    if has_semantic:
        assignment, steps = select_models(plan, models, cost_model, cfg.epsilon_quality)
    else:
        assignment, steps = {}, []

    cost_after = cost_model.estimate(plan, assignment)
    return OptimizedPlan(
        plan=plan,
        assignment=assignment,
        cost_before=cost_before,
        cost_after=cost_after,
        rewrite_trace=rewrite_trace,
        join_trace=join_trace,
        selection_steps=steps,
        selectivities=dict(analyzer.cache),
        warnings=list(analyzer.warnings),
    )


__all__ = ["OptimizedPlan", "optimize"]
