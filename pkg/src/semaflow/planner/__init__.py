from .agents import (
    AgentClient,
    FALLBACK_TOP_K,
    REASK_BUDGET,
    TaskContext,
    generate_plan,
    select_datasets,
)
from .loop import FailureReport, PlannerSettings, TaskResult, TaskRunner, task_id_for
from .prompts import (
    DEFAULT_TEMPLATE_DIR,
    ROLES,
    TemplateSet,
    knowledge_lines,
    profile_lines,
    tool_lines,
)
from .validation import (
    DEFAULT_N_PER_KIND,
    VALIDATOR_KINDS,
    ValidationVerdict,
    is_approval,
    validate_plan,
)

__all__ = [
    "AgentClient",
    "DEFAULT_N_PER_KIND",
    "DEFAULT_TEMPLATE_DIR",
    "FALLBACK_TOP_K",
    "FailureReport",
    "PlannerSettings",
    "REASK_BUDGET",
    "ROLES",
    "TaskContext",
    "TaskResult",
    "TaskRunner",
    "VALIDATOR_KINDS",
    "ValidationVerdict",
    "TemplateSet",
    "generate_plan",
    "is_approval",
    "knowledge_lines",
    "profile_lines",
    "select_datasets",
    "task_id_for",
    "tool_lines",
    "validate_plan",
]
