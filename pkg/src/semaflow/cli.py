"""Command line over the HTTP service.

Every command speaks to the FastAPI app: in-process by default (no socket,
no daemon), or to a remote server via --server. Output is either aligned
text or, with --json, one canonical JSON document (sorted keys, compact
separators) that is byte-identical across runs for a fixed fixture set.

Exit codes: 0 success, 1 task failure, 2 configuration or IO error.
"""

from __future__ import annotations

import dataclasses
import json
import sys
import warnings
from pathlib import Path

import click
import httpx

# the in-process test client is our intended transport, not a test shim
warnings.filterwarnings("ignore", message=".*starlette.testclient.*")

from .config import load_config
from .engine import EXPLAIN_SECTIONS
from .errors import ConfigError, ConnectorError, SemaflowError

CONFIG_ERRORS = (ConfigError, ConnectorError)
CONFIG_ERROR_NAMES = {"ConfigError", "ConnectorError"}


def die(message: str, code: int):
    click.echo(message, err=True)
    sys.exit(code)


def canonical_json(body) -> str:
    return json.dumps(body, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def render_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return json.dumps(value)
    return str(value)


def format_table(doc: dict) -> str:
    """Aligned text for a {columns, rows} table document."""
    headers = [c[0] for c in doc["columns"]]
    grid = [[render_cell(v) for v in row] for row in doc["rows"]]
    widths = [
        max(len(h), *(len(r[i]) for r in grid)) if grid else len(h)
        for i, h in enumerate(headers)
    ]
    lines = [
        " | ".join(h.ljust(w) for h, w in zip(headers, widths)),
        "-+-".join("-" * w for w in widths),
    ]
    lines += [" | ".join(c.ljust(w) for c, w in zip(row, widths)) for row in grid]
    lines.append(f"({len(grid)} row(s))")
    return "\n".join(lines)


def format_explain(sections: dict) -> str:
    blocks = []
    for name in EXPLAIN_SECTIONS:
        lines = sections.get(name) or ["(none)"]
        blocks.append("\n".join([name] + [f"  {line}" for line in lines]))
    return "\n".join(blocks)


class ServiceClient:
    """Thin HTTP client; in-process ASGI unless a server URL is given."""

    def __init__(self, config_path: str, server: str | None, provider_mode: str | None = None):
        if server:
            self._client = httpx.Client(base_url=server, timeout=300.0)
        else:
            config = load_config(config_path)
            if provider_mode and provider_mode != config.provider.mode:
                config = dataclasses.replace(
                    config,
                    provider=dataclasses.replace(config.provider, mode=provider_mode),
                )
            from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app(config), raise_server_exceptions=False)

    def request(self, method: str, path: str, body: dict | None = None) -> dict:
        """Returns the response document; non-2xx becomes an exit."""
        try:
            resp = self._client.request(method, path, json=body)
        except httpx.HTTPError as e:
            die(f"cannot reach server: {e}", 2)
        try:
            doc = resp.json()
        except ValueError:
            die(f"server returned status {resp.status_code} with a non-JSON body", 2)
        if resp.status_code != 200:
            error = doc.get("error", "")
            message = doc.get("message") or canonical_json(doc)
            die(message, 2 if error in CONFIG_ERROR_NAMES else 1)
        return doc


pass_state = click.make_pass_decorator(dict)


@click.group()
@click.option(
    "--config",
    "config_path",
    default="semaflow.yaml",
    show_default=True,
    help="Path to the system configuration file.",
)
@click.option(
    "--server",
    default=None,
    help="Base URL of a running service; default is in-process.",
)
@click.pass_context
def main(ctx: click.Context, config_path: str, server: str | None):
    """Natural-language analytics over configured data sources."""
    ctx.obj = {"config_path": config_path, "server": server}


def make_client(state: dict, provider_mode: str | None = None) -> ServiceClient:
    try:
        return ServiceClient(state["config_path"], state["server"], provider_mode)
    except CONFIG_ERRORS as e:
        die(str(e), 2)
    except SemaflowError as e:
        die(str(e), 1)


@main.command()
@click.argument("connectors", nargs=-1)
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
@pass_state
def profile(state: dict, connectors: tuple[str, ...], as_json: bool):
    """Profile every dataset reachable through the connectors."""
    client = make_client(state)
    report = client.request("POST", "/profile", {"connectors": list(connectors) or None})
    datasets = client.request("GET", "/datasets")["datasets"]
    if as_json:
        click.echo(canonical_json({"report": report, "datasets": datasets}))
    else:
        for skipped, reason in report["skipped"]:
            click.echo(f"skipped {skipped}: {reason}", err=True)
        for warning in report["warnings"]:
            click.echo(f"warning: {warning}", err=True)
        click.echo(f"profiled {len(report['profiled'])} dataset(s)")
        for doc in datasets:
            segments = doc.get("segment_counts") or {}
            size = (
                f"{sum(segments.values())} segment(s)"
                if segments
                else f"{doc['row_count']} rows"
            )
            click.echo(f"- {doc['name']} ({doc['kind']}, {doc['format']}, {size}): {doc['summary']}")
    if not report["profiled"] and report["skipped"]:
        first, reason = report["skipped"][0]
        die(f"nothing profiled; first failure: {first}: {reason}", 2)


@main.command()
@click.argument("query")
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
@click.option("--explain", is_flag=True, help="Show plan, rewrites, join order, models, cost.")
@click.option("--max-iter", type=int, default=None, help="Override the iteration budget.")
@pass_state
def ask(state: dict, query: str, as_json: bool, explain: bool, max_iter: int | None):
    """Answer a natural-language question over the profiled datasets."""
    client = make_client(state)
    body = client.request(
        "POST", "/ask", {"query": query, "max_iterations": max_iter, "explain": explain}
    )
    if as_json:
        click.echo(canonical_json(body))
    elif body["status"] == "ok":
        click.echo(format_table(body["answer"]))
        if explain and body.get("explain"):
            click.echo(format_explain(body["explain"]))
    if body["status"] != "ok":
        if not as_json:
            click.echo(body["failure"]["transcript"], err=True)
        sys.exit(1)


@main.command("run-plan")
@click.argument("plan_file", type=click.Path(path_type=Path))
@click.option("--json", "as_json", is_flag=True, help="Machine-readable output.")
@click.option("--explain", is_flag=True, help="Show plan, rewrites, join order, models, cost.")
@click.option("--no-optimize", is_flag=True, help="Execute the plan exactly as written.")
@pass_state
def run_plan(state: dict, plan_file: Path, as_json: bool, explain: bool, no_optimize: bool):
    """Validate, optimize, and execute a plan document."""
    try:
        text = plan_file.read_text(encoding="utf-8")
    except OSError as e:
        die(f"cannot read plan file {plan_file}: {e}", 2)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        die(f"plan file {plan_file} is not valid JSON: {e}", 1)
    client = make_client(state)
    body = client.request(
        "POST", "/run-plan", {"plan": doc, "optimize": not no_optimize, "explain": explain}
    )
    if as_json:
        click.echo(canonical_json(body))
        if body["status"] != "ok":
            sys.exit(1)
        return
    if body["status"] != "ok":
        for issue in body["issues"]:
            click.echo(f"node {issue['node_id']} [{issue['category']}]: {issue['message']}", err=True)
        die("plan rejected by grammar validation", 1)
    click.echo(format_table(body["answer"]))
    if explain and body.get("explain"):
        click.echo(format_explain(body["explain"]))


@main.command()
@pass_state
def repl(state: dict):
    """Interactive session: one question per line, shared memory."""
    client = make_client(state)
    click.echo("semaflow repl; empty line or 'exit' to leave")
    while True:
        try:
            line = input("semaflow> ").strip()
        except EOFError:
            click.echo("")
            break
        if not line or line in ("exit", "quit"):
            break
        body = client.request("POST", "/ask", {"query": line})
        if body["status"] == "ok":
            click.echo(format_table(body["answer"]))
        else:
            click.echo(body["failure"]["transcript"], err=True)


@main.group()
def fixtures():
    """Record or verify deterministic provider fixtures."""


@fixtures.command()
@click.argument("suite", type=click.Path(path_type=Path))
@pass_state
def record(state: dict, suite: Path):
    """Run a question suite (one per line) with fixture recording on."""
    if state["server"]:
        die("fixtures record runs in-process only; drop --server", 2)
    try:
        lines = suite.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        die(f"cannot read suite {suite}: {e}", 2)
    questions = [q.strip() for q in lines if q.strip() and not q.strip().startswith("#")]
    if not questions:
        die(f"suite {suite} contains no questions", 2)
    client = make_client(state, provider_mode="record")
    failures = 0
    for query in questions:
        body = client.request("POST", "/ask", {"query": query})
        mark = "ok" if body["status"] == "ok" else "FAILED"
        if body["status"] != "ok":
            failures += 1
        click.echo(f"[{mark}] {query}")
    verify = client.request("POST", "/fixtures/verify")
    click.echo(f"recorded; store now holds {verify['fixture_count']} fixture(s)")
    sys.exit(1 if failures else 0)


@fixtures.command()
@pass_state
def verify(state: dict):
    """Check every stored fixture for key/content consistency."""
    client = make_client(state)
    body = client.request("POST", "/fixtures/verify")
    for problem in body["problems"]:
        click.echo(problem, err=True)
    if body["problems"]:
        die(f"{len(body['problems'])} fixture problem(s)", 1)
    click.echo(f"{body['fixture_count']} fixture(s) verified")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@pass_state
def serve(state: dict, host: str, port: int):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    try:
        config = load_config(state["config_path"])
        app = create_app(config)
    except CONFIG_ERRORS as e:
        die(str(e), 2)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
