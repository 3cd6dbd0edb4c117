"""Author the replay fixtures and golden answers for the bundled samples.

Builds a rule-based provider whose manipulation agent answers each suite
question with the handcrafted plan from samples/suite.json, wraps it with
a recording provider, and drives full asks so every prompt along the way
(profiling, selection, sketch, plans, validators, sampling, row calls)
lands in samples/fixtures. Golden answers are captured from the same runs.

Rerunning regenerates the identical store; run make_samples.py first.
"""

from __future__ import annotations

import json
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from semaflow.config import load_config  # noqa: E402
from semaflow.engine import AnalyticsEngine  # noqa: E402
from semaflow.provider import (  # noqa: E402
    FixtureStore,
    RecordingChatProvider,
    make_mock_provider,
)

SAMPLES = ROOT / "samples"


def authoring_provider(suite: list[dict], scenario: dict):
    """Mock whose manipulation agent emits the handcrafted plans."""
    mock = make_mock_provider()

    def plan_rule(question: str, plan: dict):
        payload = json.dumps(plan)

        def match(model: str, prompt: str) -> bool:
            return "Respond with the plan JSON only" in prompt and question in prompt

        return match, payload

    for entry in suite:
        match, payload = plan_rule(entry["question"], entry["plan"])
        mock.add_rule(f"plan-{entry['id']}", match, payload, front=True)

    # scenario: first attempt emits the broken SQL; once the recorded
    # execution error shows up in the memory transcript, emit the fix
    match, payload = plan_rule(scenario["question"], scenario["broken_plan"])
    mock.add_rule("scenario-broken", match, payload, front=True)

    def match_fix(model: str, prompt: str) -> bool:
        return (
            "Respond with the plan JSON only" in prompt
            and scenario["question"] in prompt
            and "no such column" in prompt
        )

    mock.add_rule(
        "scenario-fixed", match_fix, json.dumps(scenario["fixed_plan"]), front=True
    )
    return mock


def main():
    suite = json.loads((SAMPLES / "suite.json").read_text(encoding="utf-8"))
    scenario = json.loads((SAMPLES / "scenario.json").read_text(encoding="utf-8"))

    fixtures = SAMPLES / "fixtures"
    golden = SAMPLES / "golden"
    for path in (fixtures, golden):
        if path.exists():
            shutil.rmtree(path)
        path.mkdir(parents=True)

    state = Path(tempfile.mkdtemp(prefix="semaflow-record-"))
    config_text = (SAMPLES / "semaflow.yaml").read_text(encoding="utf-8")
    config_text = config_text.replace(".state/catalog", str(state / "catalog"))
    config_text = config_text.replace(".state/memory", str(state / "memory"))
    record_config = state / "record.yaml"
    record_config.write_text(config_text, encoding="utf-8")
    (state / "data").symlink_to(SAMPLES / "data")
    (state / "warehouse.db").symlink_to(SAMPLES / "warehouse.db")
    (state / "models.yaml").symlink_to(SAMPLES / "models.yaml")
    (state / "fixtures").symlink_to(fixtures)

    config = load_config(record_config)
    chat = RecordingChatProvider(authoring_provider(suite, scenario), FixtureStore(fixtures))
    engine = AnalyticsEngine(config, chat=chat)

    report = engine.profile()
    print(f"profiled: {report.profiled} extracted: {report.extracted}")
    if report.skipped:
        raise SystemExit(f"profiling skipped datasets: {report.skipped}")

    for entry in suite:
        outcome = engine.ask(entry["question"])
        result = outcome.result
        if not result.ok:
            raise SystemExit(
                f"{entry['id']} failed during recording:\n{result.failure.transcript()}"
            )
        doc = {
            "id": entry["id"],
            "question": entry["question"],
            "iterations": result.iterations,
            "answer": result.answer.to_json(),
        }
        (golden / f"{entry['id']}.json").write_text(
            json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )
        print(f"{entry['id']}: {len(result.answer)} row(s) in {result.iterations} iteration(s)")

    outcome = engine.ask(scenario["question"])
    result = outcome.result
    if not result.ok or result.iterations != 2:
        status = result.iterations if result.ok else result.failure.transcript()
        raise SystemExit(f"scenario did not settle in 2 iterations: {status}")
    first_failure = [
        e for e in result.events if e["iteration"] == 1 and e["stage"] == "execute"
    ]
    if not first_failure or "[grammar]" not in first_failure[0]["detail"]:
        raise SystemExit(f"scenario iteration 1 did not fail as grammar: {result.events}")
    doc = {
        "id": scenario["id"],
        "question": scenario["question"],
        "iterations": result.iterations,
        "answer": result.answer.to_json(),
        "events": result.events,
    }
    (golden / f"{scenario['id']}.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    print(f"{scenario['id']}: 2 iterations, {len(result.answer)} row(s)")

    problems = FixtureStore(fixtures).verify()
    if problems:
        raise SystemExit(f"fixture store inconsistent: {problems}")
    print(f"{len(FixtureStore(fixtures).keys())} fixture(s), {len(list(golden.glob('*.json')))} golden(s)")
    shutil.rmtree(state)


if __name__ == "__main__":
    main()
