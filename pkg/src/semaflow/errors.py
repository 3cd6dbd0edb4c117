"""Shared exception types.

Every error that can surface from planning, optimization, or execution is
defined here so the memory layer can classify messages from one catalog.
"""

from __future__ import annotations

__all__ = [
    "SemaflowError",
    "ConfigError",
    "DecodeError",
    "UnknownOperator",
    "ArityError",
    "UnknownDataset",
    "UnknownColumn",
    "TypeMismatch",
    "DuplicateColumn",
    "PreconditionError",
    "NoCandidate",
    "EmptyDataset",
    "ConnectorError",
    "DimensionMismatch",
    "ProviderError",
    "UnknownFixture",
    "MissingAssignment",
    "ExecutionError",
]


class SemaflowError(Exception):
    """Base class for all engine errors."""


class ConfigError(SemaflowError):
    """Configuration document is missing, malformed, or incomplete."""


class DecodeError(SemaflowError):
    """A plan document could not be decoded.

    ``offset`` is the byte offset of the syntax error when the underlying
    JSON parser reports one, otherwise None.
    """

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message)
        self.offset = offset

    def __str__(self) -> str:  # keep the offset visible in transcripts
        base = super().__str__()
        if self.offset is not None:
            return f"DecodeError at byte {self.offset}: {base}"
        return f"DecodeError: {base}"


class UnknownOperator(SemaflowError):
    def __init__(self, name: str, node_id: int | None = None):
        super().__init__(f"UnknownOperator: '{name}' is not a plan operator")
        self.name = name
        self.node_id = node_id


class ArityError(SemaflowError):
    def __init__(self, op: str, expected: str, got: int, node_id: int | None = None):
        super().__init__(
            f"ArityError: operator {op} at node {node_id} expects {expected} "
            f"children, got {got}"
        )
        self.op = op
        self.node_id = node_id


class UnknownDataset(SemaflowError):
    def __init__(self, name: str):
        super().__init__(f"UnknownDataset: no dataset named '{name}' in the catalog")
        self.name = name


class UnknownColumn(SemaflowError):
    def __init__(self, column: str, node_id: int | None = None):
        super().__init__(
            f"UnknownColumn: column '{column}' referenced at node {node_id} "
            f"does not exist in the input schema"
        )
        self.column = column
        self.node_id = node_id


class TypeMismatch(SemaflowError):
    def __init__(self, detail: str, node_id: int | None = None):
        super().__init__(f"TypeMismatch at node {node_id}: {detail}")
        self.node_id = node_id


class DuplicateColumn(SemaflowError):
    def __init__(self, column: str, node_id: int | None = None):
        super().__init__(
            f"DuplicateColumn: output of node {node_id} would contain "
            f"'{column}' more than once"
        )
        self.column = column
        self.node_id = node_id


class PreconditionError(SemaflowError):
    """A task request violated a basic precondition (e.g. empty query)."""


class NoCandidate(SemaflowError):
    """Dataset selection produced no usable candidates."""


class EmptyDataset(SemaflowError):
    def __init__(self, name: str):
        super().__init__(f"EmptyDataset: dataset '{name}' has no content to profile")
        self.name = name


class ConnectorError(SemaflowError):
    """A connector failed; the message carries the backend's own text."""


class DimensionMismatch(SemaflowError):
    def __init__(self, expected: int, got: int):
        super().__init__(
            f"DimensionMismatch: vector of dimension {got} against a "
            f"collection of dimension {expected}"
        )
        self.expected = expected
        self.got = got


class ProviderError(SemaflowError):
    """The chat or embedding backend failed."""


class UnknownFixture(ProviderError):
    def __init__(self, key: str, model: str):
        super().__init__(
            f"UnknownFixture: no recorded response for key {key} (model {model}) "
            f"in strict replay mode"
        )
        self.key = key
        self.model = model


class MissingAssignment(SemaflowError):
    def __init__(self, node_id: int):
        super().__init__(
            f"MissingAssignment: semantic operator at node {node_id} has no model assigned"
        )
        self.node_id = node_id


class ExecutionError(SemaflowError):
    """Execution of a plan node failed. Carries the failing node id."""

    def __init__(self, message: str, node_id: int | None = None):
        super().__init__(message)
        self.node_id = node_id


# Sample message per error kind, used by the memory layer's coverage test:
# the bundled classification dictionary must route every one of these
# without falling back to a model call.
SAMPLE_MESSAGES = {
    "DecodeError": str(DecodeError("expecting ',' delimiter", offset=120)),
    "UnknownOperator": str(UnknownOperator("TopK", 4)),
    "ArityError": str(ArityError("Join", "exactly 2", 1, 4)),
    "UnknownDataset": str(UnknownDataset("payments_2019")),
    "UnknownColumn": str(UnknownColumn("H", 3)),
    "TypeMismatch": str(TypeMismatch("comparison operand types text and empty list", 3)),
    "DuplicateColumn": str(DuplicateColumn("country", 5)),
    "NoCandidate": "NoCandidate: no dataset matches the question",
    "EmptyDataset": str(EmptyDataset("notes")),
    "ConnectorError": "ConnectorError: no such column: h",
    "DimensionMismatch": str(DimensionMismatch(64, 32)),
    "ProviderError": "ProviderError: backend returned status 500",
    "UnknownFixture": str(UnknownFixture("ab12", "tier-large")),
    "ExecutionError": str(ExecutionError("Script operator is not executable without a sandbox", 7)),
    "ValidatorRejection": "rejected by validators: the plan does not address the average fee",
}
