"""Model registry: the priced, quality-rated tiers available to semantic ops.

The registry file (YAML or JSON) is a list of entries with model_name,
fee_in, fee_out (currency per token), quality in (0, 1], and an integer
tier where 1 is the cheapest. Quality must strictly increase with tier.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import yaml

from .errors import ConfigError


@dataclass(frozen=True)
class ModelSpec:
    model_name: str
    fee_in: float
    fee_out: float
    quality: float
    tier: int


def validate_registry(models: list[ModelSpec]) -> list[ModelSpec]:
    if not models:
        raise ConfigError("model registry is empty")
    tiers = [m.tier for m in models]
    if len(set(tiers)) != len(tiers):
        raise ConfigError("model registry has duplicate tiers")
    ordered = sorted(models, key=lambda m: m.tier)
    for m in ordered:
        if not (0.0 < m.quality <= 1.0):
            raise ConfigError(f"model {m.model_name}: quality must be in (0, 1]")
        if m.fee_in < 0 or m.fee_out < 0:
            raise ConfigError(f"model {m.model_name}: negative fee")
        if m.tier < 1:
            raise ConfigError(f"model {m.model_name}: tier must be >= 1")
    for lo, hi in zip(ordered, ordered[1:]):
        if hi.quality <= lo.quality:
            raise ConfigError(
                f"quality must strictly increase with tier: "
                f"{lo.model_name} (tier {lo.tier}) vs {hi.model_name} (tier {hi.tier})"
            )
    return ordered


def load_registry(path: str | Path) -> list[ModelSpec]:
    """Models sorted by tier ascending."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"model registry not found: {path}")
    text = path.read_text(encoding="utf-8")
    data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    if not isinstance(data, list):
        raise ConfigError("model registry must be a list of entries")
    models = []
    for entry in data:
        try:
            models.append(
                ModelSpec(
                    model_name=entry["model_name"],
                    fee_in=float(entry["fee_in"]),
                    fee_out=float(entry["fee_out"]),
                    quality=float(entry["quality"]),
                    tier=int(entry["tier"]),
                )
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"bad registry entry {entry!r}: {e}") from e
    return validate_registry(models)


def top_tier(models: list[ModelSpec]) -> ModelSpec:
    return max(models, key=lambda m: m.tier)


def bottom_tier(models: list[ModelSpec]) -> ModelSpec:
    return min(models, key=lambda m: m.tier)
