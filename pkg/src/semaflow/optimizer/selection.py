"""Greedy model assignment under a plan-quality budget.

Every semantic operator starts on the highest tier. Each step downgrades
by one tier the operator with the best cost-saved-per-quality-lost ratio,
as long as cumulative plan quality stays within epsilon of the initial
value. Plan quality is the product of per-operator model qualities.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import ConfigError
from ..models import ModelSpec, validate_registry
from ..plan_ir import Plan
from .cost import CostModel


@dataclass
class SelectionStep:
    node_id: int
    from_tier: int
    to_tier: int
    delta_cost: float
    delta_quality: float
    score: float
    quality_after: float
    cost_after: float

    def to_dict(self) -> dict:
        return {
            "node_id": self.node_id,
            "from_tier": self.from_tier,
            "to_tier": self.to_tier,
            "delta_cost": self.delta_cost,
            "delta_quality": self.delta_quality,
            "score": self.score,
            "quality_after": self.quality_after,
            "cost_after": self.cost_after,
        }


def plan_quality(assignment: dict[int, ModelSpec]) -> float:
    quality = 1.0
    for model in assignment.values():
        quality *= model.quality
    return quality


def select_models(
    plan: Plan,
    registry: list[ModelSpec],
    cost_model: CostModel,
    epsilon: float | None = None,
) -> tuple[dict[int, ModelSpec], list[SelectionStep]]:
    semantic_ids = sorted(n.node_id for n in plan.root.walk() if n.is_semantic)
    if not semantic_ids:
        return {}, []
    models = validate_registry(list(registry))
    if epsilon is None:
        epsilon = cost_model.config.epsilon_quality
    if not 0 < epsilon < 1:
        raise ConfigError(f"epsilon must be in (0, 1), got {epsilon}")

    tier_index = {m.tier: i for i, m in enumerate(models)}
    assignment = {node_id: models[-1] for node_id in semantic_ids}
    q_initial = plan_quality(assignment)
    cost_now = cost_model.estimate(plan, assignment).total_cost
    steps: list[SelectionStep] = []

    while True:
        best: tuple[float, int, ModelSpec, float, float] | None = None
        q_now = plan_quality(assignment)
        for node_id in semantic_ids:
            current = assignment[node_id]
            idx = tier_index[current.tier]
            if idx == 0:
                continue
            candidate = models[idx - 1]
            trial = dict(assignment)
            trial[node_id] = candidate
            q_trial = plan_quality(trial)
            if (q_initial - q_trial) / q_initial > epsilon:
                continue  # budget would be exceeded
            cost_trial = cost_model.estimate(plan, trial).total_cost
            delta_cost = cost_now - cost_trial
            delta_quality = q_now - q_trial
            score = delta_cost / delta_quality
            if best is None or score > best[0]:
                best = (score, node_id, candidate, cost_trial, q_trial)
        if best is None or best[0] <= 0:
            break
        score, node_id, candidate, cost_trial, q_trial = best
        steps.append(
            SelectionStep(
                node_id=node_id,
                from_tier=assignment[node_id].tier,
                to_tier=candidate.tier,
                delta_cost=cost_now - cost_trial,
                delta_quality=q_now - q_trial,
                score=score,
                quality_after=q_trial,
                cost_after=cost_trial,
            )
        )
        assignment[node_id] = candidate
        cost_now = cost_trial
    return assignment, steps


__all__ = ["SelectionStep", "plan_quality", "select_models"]
