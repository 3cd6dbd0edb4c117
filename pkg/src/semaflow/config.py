"""System configuration: one YAML document, ${VAR} environment expansion.

Secrets never live in the file verbatim; a string value may reference
environment variables as ${NAME} and loading fails when one is unset.
Relative paths resolve against the directory containing the config file.
"""

from __future__ import annotations

import dataclasses
import os
import re
from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import ConfigError
from .optimizer import OptimizerConfig
from .planner import PlannerSettings

PROVIDER_MODES = ("mock", "record", "replay", "http")
CONNECTOR_KINDS = ("files", "sqlite")

_VAR = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


def expand_env(value, env=None):
    """Replace ${NAME} inside every string scalar, recursively."""
    table = os.environ if env is None else env
    if isinstance(value, str):
        def sub(match: re.Match) -> str:
            name = match.group(1)
            if name not in table:
                raise ConfigError(f"environment variable {name} is not set")
            return table[name]
        return _VAR.sub(sub, value)
    if isinstance(value, dict):
        return {k: expand_env(v, table) for k, v in value.items()}
    if isinstance(value, list):
        return [expand_env(v, table) for v in value]
    return value


@dataclass(frozen=True)
class ConnectorSpec:
    name: str
    kind: str
    locator: Path


@dataclass(frozen=True)
class ProviderSettings:
    mode: str = "mock"
    endpoint: str | None = None
    api_key: str | None = None
    embed_endpoint: str | None = None
    embed_model: str = "embed-default"
    agent_model: str | None = None  # default: top tier of the registry
    timeout: float = 60.0


@dataclass(frozen=True)
class SystemConfig:
    base_dir: Path
    connectors: tuple[ConnectorSpec, ...] = ()
    provider: ProviderSettings = ProviderSettings()
    model_registry: Path | None = None
    optimizer: OptimizerConfig = OptimizerConfig()
    planner: PlannerSettings = PlannerSettings()
    catalog_store: Path = Path("store/catalog")
    memory_store: Path = Path("store/memory")
    fixtures_dir: Path = Path("fixtures")
    template_dir: Path | None = None


def _resolve(base: Path, raw) -> Path:
    path = Path(str(raw))
    return path if path.is_absolute() else base / path


def _known_keys(doc: dict, allowed: tuple[str, ...], where: str):
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown {where} key(s): {', '.join(unknown)}")


def _subsettings(cls, doc: dict, where: str):
    fields = {f.name: f for f in dataclasses.fields(cls)}
    _known_keys(doc, tuple(fields), where)
    coerced = {}
    for key, value in doc.items():
        target = fields[key].type
        try:
            if target in ("int", int):
                coerced[key] = int(value)
            elif target in ("float", float):
                coerced[key] = float(value)
            else:
                coerced[key] = value
        except (TypeError, ValueError) as e:
            raise ConfigError(f"{where}.{key}: {e}") from e
    try:
        return cls(**coerced)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad {where} settings: {e}") from e


def _connector_specs(base: Path, entries) -> tuple[ConnectorSpec, ...]:
    if not isinstance(entries, list):
        raise ConfigError("connectors must be a list")
    specs = []
    seen = set()
    for entry in entries:
        if not isinstance(entry, dict):
            raise ConfigError(f"connector entry must be a mapping: {entry!r}")
        _known_keys(entry, ("name", "kind", "locator"), "connector")
        try:
            name, kind = str(entry["name"]), str(entry["kind"])
            locator = _resolve(base, entry["locator"])
        except KeyError as e:
            raise ConfigError(f"connector entry missing key {e}") from e
        if kind not in CONNECTOR_KINDS:
            raise ConfigError(
                f"connector {name}: kind must be one of {', '.join(CONNECTOR_KINDS)}"
            )
        if name in seen:
            raise ConfigError(f"duplicate connector name: {name}")
        seen.add(name)
        if not locator.exists():
            raise ConfigError(f"connector {name}: path does not exist: {locator}")
        specs.append(ConnectorSpec(name=name, kind=kind, locator=locator))
    return tuple(specs)


def load_config(path: str | Path, env=None) -> SystemConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = yaml.safe_load(path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"cannot parse {path}: {e}") from e
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    doc = expand_env(doc, env)
    base = path.resolve().parent
    _known_keys(
        doc,
        ("connectors", "provider", "model_registry", "optimizer", "planner", "paths"),
        "top-level",
    )

    provider = _subsettings(ProviderSettings, doc.get("provider") or {}, "provider")
    if provider.mode not in PROVIDER_MODES:
        raise ConfigError(
            f"provider.mode must be one of {', '.join(PROVIDER_MODES)}, got {provider.mode!r}"
        )
    if provider.mode == "http" and not provider.endpoint:
        raise ConfigError("provider.mode http requires provider.endpoint")

    optimizer = _subsettings(OptimizerConfig, doc.get("optimizer") or {}, "optimizer")
    if not 0.0 < optimizer.epsilon_quality < 1.0:
        raise ConfigError(
            f"optimizer.epsilon_quality must lie in (0, 1), got {optimizer.epsilon_quality}"
        )
    planner = _subsettings(PlannerSettings, doc.get("planner") or {}, "planner")

    paths = doc.get("paths") or {}
    if not isinstance(paths, dict):
        raise ConfigError("paths must be a mapping")
    _known_keys(
        paths, ("catalog_store", "memory_store", "fixtures", "templates"), "paths"
    )

    registry = doc.get("model_registry")
    registry_path = _resolve(base, registry) if registry else None
    if registry_path is not None and not registry_path.exists():
        raise ConfigError(f"model registry not found: {registry_path}")

    template_dir = (
        _resolve(base, paths["templates"]) if paths.get("templates") else None
    )
    if template_dir is not None and not template_dir.is_dir():
        raise ConfigError(f"template directory not found: {template_dir}")

    config = SystemConfig(
        base_dir=base,
        connectors=_connector_specs(base, doc.get("connectors") or []),
        provider=provider,
        model_registry=registry_path,
        optimizer=optimizer,
        planner=planner,
        catalog_store=_resolve(base, paths.get("catalog_store", "store/catalog")),
        memory_store=_resolve(base, paths.get("memory_store", "store/memory")),
        fixtures_dir=_resolve(base, paths.get("fixtures", "fixtures")),
        template_dir=template_dir,
    )
    for state_dir in (config.catalog_store, config.memory_store):
        try:
            state_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ConfigError(f"cannot create state directory {state_dir}: {e}") from e
    return config


__all__ = [
    "CONNECTOR_KINDS",
    "PROVIDER_MODES",
    "ConnectorSpec",
    "ProviderSettings",
    "SystemConfig",
    "expand_env",
    "load_config",
]
