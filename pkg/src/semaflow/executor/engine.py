"""Bottom-up plan execution.

Relational operators run in-process with fully specified semantics; see
each handler. Semantic operators dispatch to a SemanticRunner route. A
purely relational plan never touches a provider.

Null contract (from left joins): comparisons with None are False,
arithmetic propagates None, Nones sort last ascending / first descending,
and sum/min/max/count skip None values. A group whose avg input is empty
is excluded from Aggregate output.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import ExecutionError, SemaflowError
from ..models import ModelSpec
from ..plan_ir import (
    Column,
    Op,
    Plan,
    PlanNode,
    Schema,
    eval_expr,
    infer_type,
)
from ..provider.base import ChatProvider, Embedder
from .semantic import ExecSettings, NodeStats, SemanticRunner, SEMANTIC_IMPLS
from .source import DataSource
from .table import Table


@dataclass
class ExecutionReport:
    per_node: dict[int, NodeStats] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)

    @property
    def total_calls(self) -> int:
        return sum(s.calls for s in self.per_node.values())

    @property
    def total_cost(self) -> float:
        return sum(s.cost for s in self.per_node.values())

    @property
    def total_input_tokens(self) -> int:
        return sum(s.input_tokens for s in self.per_node.values())

    @property
    def total_output_tokens(self) -> int:
        return sum(s.output_tokens for s in self.per_node.values())


class Executor:
    """Executes plans against a data source.

    ``assignment`` maps semantic node ids to model specs (the optimizer's
    output); ``impl_overrides`` forces a semantic route per node id.
    """

    def __init__(
        self,
        source: DataSource,
        chat: ChatProvider | None = None,
        embedder: Embedder | None = None,
        registry: list[ModelSpec] | None = None,
        assignment: dict[int, ModelSpec] | None = None,
        impl_overrides: dict[int, str] | None = None,
        settings: ExecSettings | None = None,
    ):
        self.source = source
        self.assignment = dict(assignment or {})
        self.impl_overrides = dict(impl_overrides or {})
        self.settings = settings or ExecSettings()
        self.runner = SemanticRunner(chat, embedder, self.settings, registry)

    def execute(self, plan: Plan) -> tuple[Table, ExecutionReport]:
        report = ExecutionReport()
        table = self._exec(plan.root, report)
        return table, report

    # -- dispatch -----------------------------------------------------------

    def _exec(self, node: PlanNode, report: ExecutionReport) -> Table:
        inputs = [self._exec(c, report) for c in node.children]
        stats = NodeStats(op=node.op.value)
        report.per_node[node.node_id] = stats
        stats.rows_in = sum(len(t) for t in inputs)
        try:
            if node.is_semantic:
                impl = self.impl_overrides.get(node.node_id) or self.runner.default_impl(node)
                if impl not in SEMANTIC_IMPLS:
                    raise ExecutionError(f"unknown semantic implementation '{impl}'", node.node_id)
                out = self.runner.run(
                    node, inputs, self.assignment.get(node.node_id), impl, stats
                )
            else:
                out = self._relational(node, inputs)
        except ExecutionError as e:
            if e.node_id is None:
                raise ExecutionError(str(e), node.node_id) from e
            raise
        except SemaflowError as e:
            raise ExecutionError(str(e), node.node_id) from e
        except ZeroDivisionError:
            raise ExecutionError("division by zero while evaluating an expression", node.node_id) from None
        stats.rows_out = len(out)
        if stats.unparsed:
            report.warnings.append(
                f"node {node.node_id}: {stats.unparsed} response(s) could not be parsed"
            )
        return out

    # -- relational handlers -------------------------------------------------

    def _relational(self, node: PlanNode, inputs: list[Table]) -> Table:
        op = node.op
        if op == Op.FILE_SCAN:
            return self.source.load_table(node.attrs["dataset"])
        if op == Op.DB_SCAN:
            return self.source.run_sql(node.attrs["connector"], node.attrs["sql_text"])
        if op == Op.FILTER:
            table = inputs[0]
            rows = [
                row
                for row, d in zip(table.rows, table.iter_dicts())
                if eval_expr(node.attrs["predicate"], d) is True
            ]
            return Table(schema=table.schema, rows=rows)
        if op == Op.PROJECT:
            table = inputs[0]
            items = node.attrs["items"]
            cols = tuple(
                Column(name, infer_type(expr, table.schema, node.node_id))
                for name, expr in items
            )
            rows = [
                tuple(eval_expr(expr, d) for _, expr in items)
                for d in table.iter_dicts()
            ]
            return Table(schema=Schema(cols), rows=rows)
        if op in (Op.JOIN, Op.MERGE):
            return self._join(node, inputs[0], inputs[1])
        if op == Op.AGGREGATE:
            return self._aggregate(node, inputs[0])
        if op == Op.UNION:
            first = inputs[0]
            for t in inputs[1:]:
                if t.schema != first.schema:
                    raise ExecutionError(
                        f"Union inputs disagree: {list(first.schema.names())} "
                        f"vs {list(t.schema.names())}",
                        node.node_id,
                    )
            rows: list[tuple] = []
            for t in inputs:
                rows.extend(t.rows)
            return Table(schema=first.schema, rows=rows)
        if op == Op.SORT:
            return self._sort(node, inputs[0])
        if op == Op.LIMIT:
            table = inputs[0]
            return Table(schema=table.schema, rows=table.rows[: node.attrs["k"]])
        if op == Op.SCRIPT:
            raise ExecutionError(
                "Script operator is not executable without a sandbox; "
                "replace it with predefined operators",
                node.node_id,
            )
        raise ExecutionError(f"unhandled operator {op}", node.node_id)  # pragma: no cover

    def _join(self, node: PlanNode, left: Table, right: Table) -> Table:
        mode = node.attrs["mode"]
        condition = node.attrs["condition"]
        left_names = left.schema.names()
        right_names = right.schema.names()
        combined_schema = left.schema.concat(right.schema)
        out: list[tuple] = []
        right_dicts = [dict(zip(right_names, r)) for r in right.rows]
        for lrow in left.rows:
            ldict = dict(zip(left_names, lrow))
            matched = False
            for rrow, rdict in zip(right.rows, right_dicts):
                if eval_expr(condition, {**ldict, **rdict}) is True:
                    matched = True
                    if mode in ("inner", "left"):
                        out.append(lrow + rrow)
                    elif mode == "semi":
                        break
            if mode == "semi" and matched:
                out.append(lrow)
            elif mode == "anti" and not matched:
                out.append(lrow)
            elif mode == "left" and not matched:
                out.append(lrow + (None,) * len(right_names))
        if mode in ("semi", "anti"):
            return Table(schema=left.schema, rows=out)
        return Table(schema=combined_schema, rows=out)

    def _aggregate(self, node: PlanNode, table: Table) -> Table:
        keys = list(node.attrs["keys"])
        aggs = list(node.attrs["aggs"])
        key_idx = [table.schema.index_of(k) for k in keys]
        groups: dict[tuple, list[tuple]] = {}
        for row in table.rows:  # insertion order fixes output order
            gkey = tuple(row[i] for i in key_idx)
            groups.setdefault(gkey, []).append(row)

        out_cols = [Column(k, table.schema.type_of(k)) for k in keys]
        for func, column, out_name in aggs:
            if column == "*":
                out_cols.append(Column(out_name, "integer"))
            else:
                ctype = table.schema.type_of(column)
                if func == "count":
                    out_cols.append(Column(out_name, "integer"))
                elif func == "avg":
                    out_cols.append(Column(out_name, "real"))
                elif func == "sum":
                    out_cols.append(Column(out_name, ctype))
                else:
                    out_cols.append(Column(out_name, ctype))

        rows: list[tuple] = []
        for gkey, grows in groups.items():
            values: list = list(gkey)
            skip_group = False
            for func, column, out_name in aggs:
                if column == "*":
                    values.append(len(grows))
                    continue
                cidx = table.schema.index_of(column)
                present = [r[cidx] for r in grows if r[cidx] is not None]
                if func == "count":
                    values.append(len(present))
                elif func == "sum":
                    values.append(sum(present) if present else None)
                elif func == "min":
                    values.append(min(present) if present else None)
                elif func == "max":
                    values.append(max(present) if present else None)
                else:  # avg: undefined over an empty value set -> drop the group
                    if not present:
                        skip_group = True
                        break
                    values.append(sum(present) / len(present))
            if not skip_group:
                rows.append(tuple(values))
        return Table(schema=Schema(tuple(out_cols)), rows=rows)

    def _sort(self, node: PlanNode, table: Table) -> Table:
        keys = list(node.attrs["keys"])
        directions = list(node.attrs["directions"])
        rows = list(table.rows)
        # stable multi-key sort: apply keys right-to-left
        for key, direction in reversed(list(zip(keys, directions))):
            idx = table.schema.index_of(key)
            rows.sort(
                key=lambda r: (r[idx] is None, r[idx]),
                reverse=(direction == "desc"),
            )
        return Table(schema=table.schema, rows=rows)


def execute_plan(
    plan: Plan,
    source: DataSource,
    chat: ChatProvider | None = None,
    embedder: Embedder | None = None,
    **kwargs,
) -> tuple[Table, ExecutionReport]:
    return Executor(source, chat=chat, embedder=embedder, **kwargs).execute(plan)
