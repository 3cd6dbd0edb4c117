"""Tunables for selectivity sampling, costing, and model selection."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class OptimizerConfig:
    # greedy model selection: allowed relative plan-quality drop
    epsilon_quality: float = 0.05

    # progressive sampling: stop when the Wald interval is this tight
    ci_halfwidth: float = 0.1
    z_value: float = 1.96
    batch_start: int = 64
    max_sample: int = 512
    seed: int = 2024

    # fallbacks when sampling is impossible or the provider fails
    default_selectivity: float = 0.5
    default_join_selectivity: float = 0.1
    group_ratio: float = 0.1
    default_scan_rows: int = 1000

    # importance-weighted average of value lengths
    importance_sample: int = 64

    # expected output tokens per call, by operator kind
    out_tokens_sem_filter: int = 5
    out_tokens_sem_extract_per_target: int = 16
    out_tokens_sem_group: int = 8
    out_tokens_sem_join: int = 5

    # safety bounds
    max_rule_passes: int = 50
    join_dp_max_relations: int = 12
