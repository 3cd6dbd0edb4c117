"""Ad-hoc planner smoke checks; not part of the test suite."""

import json
import shutil
import tempfile
from pathlib import Path

from semaflow.catalog import Catalog, FileConnector
from semaflow.memory import MemoryManager
from semaflow.models import ModelSpec
from semaflow.planner import (
    AgentClient,
    PlannerSettings,
    TaskContext,
    TaskRunner,
    TemplateSet,
    generate_plan,
    select_datasets,
    validate_plan,
)
from semaflow.provider import HashEmbedder, make_mock_provider


def check(label, ok, detail=""):
    print(("PASS" if ok else "FAIL"), label, detail)
    if not ok:
        raise SystemExit(f"smoke failure: {label}")


root = Path(tempfile.mkdtemp(prefix="semaflow-smoke-"))
data = root / "data"
data.mkdir()
(data / "payments.csv").write_text(
    "pid,amount,note\n" + "\n".join(f"{i},{10 + i % 7}.0,note text {i:04d}" for i in range(12)) + "\n"
)
(data / "merchants.csv").write_text(
    "mid,mname\n" + "\n".join(f"{i},shop {i}" for i in range(4)) + "\n"
)
(data / "manual.txt").write_text(
    "Fee guide.\n\nAll fees are quoted in cents and settle daily.\n\n"
    "Refunds must be matched to the original payment within 30 days.\n"
)

embedder = HashEmbedder()
chat = make_mock_provider()
catalog = Catalog(root / "store", embedder, chat=chat)
catalog.register_connector(FileConnector("files", data))
report = catalog.profile_all(["files"])
print("profiled:", [p.name for p in catalog.profiles()])

memory = MemoryManager(root / "memstore", embedder, chat=chat)
templates = TemplateSet()
client = AgentClient(chat, "default")

# ---- dataset selection, provider and fallback modes ----
profiles = catalog.profiles()
picked = select_datasets("total fees per merchant", profiles, templates,
                         client=client, catalog=catalog)
check("selection via provider returns subset", 0 < len(picked) <= 3,
      str([p.name for p in picked]))
fallback = select_datasets("payments", profiles, templates, embedder=embedder)
check("fallback ranks the named dataset first", fallback[0].name == "payments",
      str([p.name for p in fallback]))

# ---- plan generation (mock manipulation agent emits a Limit over FileScan) ----
ctx = TaskContext(
    task_id="t1",
    nl_query="show recent payments",
    selected_profiles=[catalog.profile("payments")],
)
plan = generate_plan(ctx, templates, client)
check("generate_plan parses mock output", plan.root.op.value == "Limit")

# ---- re-ask on undecodable output ----
flaky_calls = {"n": 0}


def flaky_plan(model, prompt):
    flaky_calls["n"] += 1
    if flaky_calls["n"] == 1:
        return "here is the plan: {not json"
    return json.dumps({
        "version": 1,
        "root": {"id": 1, "op": "FileScan",
                 "attrs": {"dataset": "payments", "format": "csv"}, "children": []},
    })


reask_chat = make_mock_provider()
reask_chat.add_rule("flaky", "Respond with the plan JSON only", flaky_plan, front=True)
errors_seen = []
plan2 = generate_plan(ctx, templates, AgentClient(reask_chat, "default"),
                      on_error=errors_seen.append)
check("re-ask recovers from bad JSON", plan2.root.op.value == "FileScan" and flaky_calls["n"] == 2,
      f"attempts={flaky_calls['n']} errors={errors_seen}")
check("decode error surfaced to callback", len(errors_seen) == 1 and "DecodeError" in errors_seen[0])

# ---- majority vote ----
accepted, verdicts = validate_plan(plan, ctx, templates, client, n_per_kind=3)
check("all-approve vote accepted", accepted and len(verdicts) == 6)

reject_chat = make_mock_provider()
reject_chat.add_rule("reject-completeness", "completeness validator",
                     "the plan ignores the date filter", front=True)
accepted2, verdicts2 = validate_plan(plan, ctx, templates,
                                     AgentClient(reject_chat, "default"), n_per_kind=3)
check("3/6 vote rejected (strict majority)", not accepted2
      and sum(v.approved for v in verdicts2) == 3)
corrections = [v.correction for v in verdicts2 if not v.approved]
check("corrections carried", corrections == ["the plan ignores the date filter"] * 3)

# ---- full loop, all green ----
registry = [
    ModelSpec("tiny", 1e-06, 2e-06, 0.8, 1),
    ModelSpec("big", 1e-05, 2e-05, 0.95, 2),
]
runner = TaskRunner(catalog, memory, chat, embedder, registry=registry,
                    settings=PlannerSettings(max_iterations=2))
result = runner.run("show recent payments")
check("all-green run answers in iteration 1", result.ok and result.iterations == 1,
      f"status={result.status} events={result.events}")
check("answer rows present", result.answer is not None and len(result.answer) == 4,
      f"rows={len(result.answer) if result.answer is not None else None}")
check("no active memory after task", memory.active_records(result.task_id) == [])

# ---- failing loop -> FailureReport ----
fail_chat = make_mock_provider()
fail_chat.add_rule("always-reject", "Respond with APPROVE",
                   "the plan misreads the fee table", front=True)
memory2 = MemoryManager(root / "memstore2", embedder, chat=fail_chat)
runner2 = TaskRunner(catalog, memory2, fail_chat, embedder, registry=registry,
                     settings=PlannerSettings(max_iterations=2))
result2 = runner2.run("show recent payments")
check("rejected task fails", result2.status == "failed" and result2.failure is not None)
check("failure carries validator records",
      len(result2.failure.records) == 12
      and all("rejected by validators" in r["message"] for r in result2.failure.records),
      f"{len(result2.failure.records)} records")
check("records survive in transcript", "rejected by validators" in result2.failure.transcript())
promoted = memory2.long_term_records()
check("recurring rejection promoted to long-term", len(promoted) >= 1,
      str([r.memory for r in promoted])[:120])

shutil.rmtree(root)
print("planner smoke OK")
