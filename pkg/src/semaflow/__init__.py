"""semaflow: natural-language analytics over heterogeneous data.

Questions become tree-structured plans mixing relational and semantic
(model-executed) operators; plans are validated, cost-optimized, and run
against profiled datasets. Providers are pluggable and deterministic
offline modes (mock, record/replay) are first-class.
"""

__version__ = "0.1.0"
