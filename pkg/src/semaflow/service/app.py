"""HTTP face of the engine.

Task failures are domain outcomes, not transport errors: /ask answers 200
with status "failed" and the failure transcript. Transport-level errors
(bad config, unreadable connectors, unknown fixtures) map to 4xx with the
error class name in the body so clients can translate them to exit codes.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..config import SystemConfig
from ..engine import AnalyticsEngine, AskOutcome, RunPlanOutcome
from ..errors import ConfigError, ConnectorError, SemaflowError
from ..plan_ir import plan_to_dict
from ..provider import FixtureStore
from .schemas import (
    AskRequest,
    AskResponse,
    CostModel_,
    DatasetModel,
    DatasetsResponse,
    EventModel,
    FailureModel,
    HealthResponse,
    IssueModel,
    ModelEntry,
    ModelsResponse,
    ProfileRequest,
    ProfileResponse,
    RunPlanRequest,
    RunPlanResponse,
    TableModel,
    VerifyFixturesResponse,
)

CONFIG_ERRORS = (ConfigError, ConnectorError)


def _ask_response(outcome: AskOutcome) -> AskResponse:
    result = outcome.result
    failure = None
    if result.failure is not None:
        failure = FailureModel(
            **result.failure.to_json(), transcript=result.failure.transcript()
        )
    return AskResponse(
        status=result.status,
        task_id=result.task_id,
        iterations=result.iterations,
        answer=TableModel(**result.answer.to_json()) if result.answer is not None else None,
        plan=plan_to_dict(result.plan) if result.plan is not None else None,
        events=[EventModel(**e) for e in result.events],
        failure=failure,
        explain=outcome.explain,
    )


def _run_plan_response(outcome: RunPlanOutcome) -> RunPlanResponse:
    cost = None
    if outcome.optimized is not None and outcome.report is not None:
        cost = CostModel_(
            estimated_before=outcome.optimized.cost_before.total_cost,
            estimated_after=outcome.optimized.cost_after.total_cost,
            incurred=outcome.report.total_cost,
            calls=outcome.report.total_calls,
        )
    return RunPlanResponse(
        status=outcome.status,
        issues=[
            IssueModel(
                node_id=i.node_id, category=i.category, message=i.message, hint=i.hint
            )
            for i in outcome.issues
        ],
        plan=plan_to_dict(outcome.plan) if outcome.plan is not None else None,
        answer=TableModel(**outcome.table.to_json()) if outcome.table is not None else None,
        cost=cost,
        explain=outcome.explain,
    )


def create_app(config: SystemConfig, engine: AnalyticsEngine | None = None) -> FastAPI:
    app = FastAPI(title="semaflow", docs_url=None, redoc_url=None)
    app.state.engine = engine or AnalyticsEngine(config)

    @app.exception_handler(SemaflowError)
    async def semaflow_error(request: Request, exc: SemaflowError):
        status = 422 if isinstance(exc, CONFIG_ERRORS) else 400
        return JSONResponse(
            status_code=status,
            content={"error": type(exc).__name__, "message": str(exc)},
        )

    def engine_() -> AnalyticsEngine:
        return app.state.engine

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        eng = engine_()
        return HealthResponse(
            status="ok",
            mode=eng.config.provider.mode,
            datasets=len(eng.datasets()),
        )

    @app.get("/datasets", response_model=DatasetsResponse)
    def datasets() -> DatasetsResponse:
        return DatasetsResponse(
            datasets=[DatasetModel(**p.to_json()) for p in engine_().datasets()]
        )

    @app.get("/models", response_model=ModelsResponse)
    def models() -> ModelsResponse:
        return ModelsResponse(
            models=[
                ModelEntry(
                    model_name=m.model_name,
                    fee_in=m.fee_in,
                    fee_out=m.fee_out,
                    quality=m.quality,
                    tier=m.tier,
                )
                for m in engine_().models()
            ]
        )

    @app.post("/profile", response_model=ProfileResponse)
    def profile(body: ProfileRequest) -> ProfileResponse:
        report = engine_().profile(body.connectors)
        return ProfileResponse(**report.to_json())

    @app.post("/ask", response_model=AskResponse)
    def ask(body: AskRequest) -> AskResponse:
        outcome = engine_().ask(
            body.query, max_iterations=body.max_iterations, explain=body.explain
        )
        return _ask_response(outcome)

    @app.post("/run-plan", response_model=RunPlanResponse)
    def run_plan(body: RunPlanRequest) -> RunPlanResponse:
        outcome = engine_().run_plan(
            body.plan, optimize_plan=body.optimize, explain=body.explain
        )
        return _run_plan_response(outcome)

    @app.post("/fixtures/verify", response_model=VerifyFixturesResponse)
    def verify_fixtures() -> VerifyFixturesResponse:
        eng = engine_()
        problems = eng.verify_fixtures()
        count = len(FixtureStore(eng.config.fixtures_dir).keys())
        return VerifyFixturesResponse(fixture_count=count, problems=problems)

    return app


__all__ = ["create_app"]
