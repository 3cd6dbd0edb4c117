"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class ProfileRequest(BaseModel):
    connectors: list[str] | None = None


class ProfileResponse(BaseModel):
    profiled: list[str]
    skipped: list[list[str]]
    extracted: list[str]
    warnings: list[str]


class DatasetModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str
    kind: str
    format: str
    source: list[str]
    columns: list[list[str]] | None = Field(default=None, alias="schema")
    sample_rows: list[list] = Field(default_factory=list)
    summary: str = ""
    row_count: int | None = None
    segment_counts: dict[str, int] | None = None


class DatasetsResponse(BaseModel):
    datasets: list[DatasetModel]


class ModelEntry(BaseModel):
    model_config = ConfigDict(protected_namespaces=())

    model_name: str
    fee_in: float
    fee_out: float
    quality: float
    tier: int


class ModelsResponse(BaseModel):
    models: list[ModelEntry]


class TableModel(BaseModel):
    columns: list[list[str]]
    rows: list[list]


class EventModel(BaseModel):
    iteration: int
    stage: str
    detail: str


class RecordModel(BaseModel):
    seq: int
    iteration: int
    category: str
    message: str
    node_id: int | None = None


class FailureModel(BaseModel):
    task_id: str
    query: str
    iterations: int
    message: str
    records: list[RecordModel]
    transcript: str


class AskRequest(BaseModel):
    query: str
    max_iterations: int | None = None
    explain: bool = False


class AskResponse(BaseModel):
    status: str
    task_id: str
    iterations: int
    answer: TableModel | None = None
    plan: dict | None = None
    events: list[EventModel] = Field(default_factory=list)
    failure: FailureModel | None = None
    explain: dict[str, list[str]] | None = None


class RunPlanRequest(BaseModel):
    plan: dict
    optimize: bool = True
    explain: bool = False


class IssueModel(BaseModel):
    node_id: int
    category: str
    message: str
    hint: str | None = None


class CostModel_(BaseModel):
    estimated_before: float
    estimated_after: float
    incurred: float
    calls: int


class RunPlanResponse(BaseModel):
    status: str
    issues: list[IssueModel] = Field(default_factory=list)
    plan: dict | None = None
    answer: TableModel | None = None
    cost: CostModel_ | None = None
    explain: dict[str, list[str]] | None = None


class VerifyFixturesResponse(BaseModel):
    fixture_count: int
    problems: list[str]


class HealthResponse(BaseModel):
    status: str
    mode: str
    datasets: int


class ErrorBody(BaseModel):
    error: str
    message: str
