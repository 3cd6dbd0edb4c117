from .config import OptimizerConfig
from .cost import CostModel, NodeCost, PlanCost, split_conjuncts, uniform_assignment
from .join_order import JoinBlock, dp_best_order, find_blocks, order_joins
from .pipeline import OptimizedPlan, optimize
from .rules import CROSSABLE, RewriteEvent, RuleEngine, apply_rules, referenced_columns
from .selection import SelectionStep, plan_quality, select_models
from .selectivity import SelectivityAnalyzer, SelectivityEstimate

__all__ = [
    "CROSSABLE",
    "CostModel",
    "JoinBlock",
    "NodeCost",
    "OptimizedPlan",
    "OptimizerConfig",
    "PlanCost",
    "RewriteEvent",
    "RuleEngine",
    "SelectionStep",
    "SelectivityAnalyzer",
    "SelectivityEstimate",
    "apply_rules",
    "dp_best_order",
    "find_blocks",
    "optimize",
    "order_joins",
    "plan_quality",
    "referenced_columns",
    "select_models",
    "split_conjuncts",
    "uniform_assignment",
]
