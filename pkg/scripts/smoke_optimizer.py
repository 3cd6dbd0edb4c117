"""Ad-hoc optimizer smoke checks; not part of the test suite."""

import dataclasses
import itertools
import math
import random

from semaflow.executor import Executor, Table, TableSource
from semaflow.models import ModelSpec
from semaflow.optimizer import (
    CostModel,
    OptimizerConfig,
    SelectivityAnalyzer,
    apply_rules,
    dp_best_order,
    optimize,
    order_joins,
    select_models,
    uniform_assignment,
)
from semaflow.plan_ir import (
    Call,
    Col,
    Lit,
    Op,
    Plan,
    PlanNode,
    Schema,
    format_plan,
    serialize_plan,
    validate_grammar,
)
from semaflow.provider import HashEmbedder, make_mock_provider


def table_payments(n=40):
    schema = Schema.of(("pid", "integer"), ("amount", "real"), ("note", "text"))
    rows = [(i, float(10 + i % 7), f"note text {i:04d}") for i in range(n)]
    return Table(schema, rows)


def scan(node_id, dataset):
    return PlanNode(node_id, Op.FILE_SCAN, {"dataset": dataset, "format": "csv"})


def check(label, ok, detail=""):
    print(("PASS" if ok else "FAIL"), label, detail)
    if not ok:
        raise SystemExit(f"smoke failure: {label}")


source = TableSource()
source.add("payments", table_payments())

# ---- RULE 1: relational filter sinks below a semantic unary op ----
plan1 = Plan(
    PlanNode(
        3,
        Op.FILTER,
        {"predicate": Call("<", (Col("amount"), Lit(13.0, "real")))},
        (
            PlanNode(
                2,
                Op.SEM_FILTER,
                {"columns": ("note",), "predicate_prompt": "mentions delivery"},
                (scan(1, "payments"),),
            ),
        ),
    )
)
assert not validate_grammar(plan1, source)
out1, events1 = apply_rules(plan1, store=source)
shape1 = (
    out1.root.op == Op.SEM_FILTER
    and out1.root.children[0].op == Op.FILTER
    and out1.root.children[0].children[0].op == Op.FILE_SCAN
)
check("rule1 filter sinks below SemFilter", shape1, format_plan(out1).replace("\n", " | "))
check("rule1 traced", any(e.rule == 1 and e.applied for e in events1))

# the same relative order falls out when the semantic op is an extraction
# (the extraction floats instead, traced as rule 2)
plan1x = Plan(
    PlanNode(
        3,
        Op.FILTER,
        {"predicate": Call("<", (Col("amount"), Lit(13.0, "real")))},
        (
            PlanNode(
                2,
                Op.SEM_EXTRACT,
                {
                    "source_columns": ("note",),
                    "target_columns": ("topic",),
                    "instruction_prompt": "name the topic",
                },
                (scan(1, "payments"),),
            ),
        ),
    )
)
out1x, events1x = apply_rules(plan1x, store=source)
shape1x = (
    out1x.root.op == Op.SEM_EXTRACT
    and out1x.root.children[0].op == Op.FILTER
    and out1x.root.children[0].children[0].op == Op.FILE_SCAN
)
check("extract floats above filter", shape1x, format_plan(out1x).replace("\n", " | "))
check("float traced as rule 2", any(e.rule == 2 and e.applied for e in events1x))

# a filter that reads the produced column must not sink
plan1b = Plan(
    PlanNode(
        3,
        Op.FILTER,
        {"predicate": Call("==", (Col("topic"), Lit("x", "text")))},
        (
            PlanNode(
                2,
                Op.SEM_EXTRACT,
                {
                    "source_columns": ("note",),
                    "target_columns": ("topic",),
                    "instruction_prompt": "name the topic",
                },
                (scan(1, "payments"),),
            ),
        ),
    )
)
out1b, _ = apply_rules(plan1b, store=source)
check("rule1 respects produced columns", out1b.root.op == Op.FILTER)

# ---- RULE 2: multi-target extract splits and both pieces hoist ----
plan2 = Plan(
    PlanNode(
        3,
        Op.FILTER,
        {"predicate": Call("<", (Col("amount"), Lit(13.0, "real")))},
        (
            PlanNode(
                2,
                Op.SEM_EXTRACT,
                {
                    "source_columns": ("note", "note"),
                    "target_columns": ("topic", "urgency"),
                    "instruction_prompt": "classify the note",
                },
                (scan(1, "payments"),),
            ),
        ),
    )
)
out2, events2 = apply_rules(plan2, store=source)


def chain_ops(plan):
    ops = []
    node = plan.root
    while True:
        ops.append((node.op, dict(node.attrs).get("target_columns")))
        if not node.children:
            return ops
        node = node.children[0]


ops2 = chain_ops(out2)
shape2 = (
    [o for o, _ in ops2] == [Op.SEM_EXTRACT, Op.SEM_EXTRACT, Op.FILTER, Op.FILE_SCAN]
    and all(len(t) == 1 for o, t in ops2 if o == Op.SEM_EXTRACT)
)
check("rule2 split + hoist above filter", shape2, " -> ".join(str(o) for o, _ in ops2))
check(
    "rule2 traced as defer-without-consumer",
    any(e.rule == 2 and e.applied for e in events2),
    ";".join(str(e.rule) for e in events2 if e.applied),
)

# ---- RULE 3: the consumed target stays below, the other hoists ----
plan3 = Plan(
    PlanNode(
        3,
        Op.FILTER,
        {"predicate": Call("==", (Col("topic"), Lit("billing", "text")))},
        (
            PlanNode(
                2,
                Op.SEM_EXTRACT,
                {
                    "source_columns": ("note", "note"),
                    "target_columns": ("topic", "urgency"),
                    "instruction_prompt": "classify the note",
                },
                (scan(1, "payments"),),
            ),
        ),
    )
)
out3, events3 = apply_rules(plan3, store=source)
ops3 = chain_ops(out3)
shape3 = [(o, t and tuple(t)) for o, t in ops3] == [
    (Op.SEM_EXTRACT, ("urgency",)),
    (Op.FILTER, None),
    (Op.SEM_EXTRACT, ("topic",)),
    (Op.FILE_SCAN, None),
]
check("rule3 consumer blocks one piece", shape3, " -> ".join(f"{o}:{t}" for o, t in ops3))
check(
    "rule3 traced as split-at-consumer",
    any(e.rule == 3 and e.applied for e in events3),
    ";".join(str(e.rule) for e in events3 if e.applied),
)

# ---- rewrite soundness: results identical before and after ----
chat = make_mock_provider()
embedder = HashEmbedder()
for name, before, after in (("r1", plan1, out1), ("r1x", plan1x, out1x), ("r2", plan2, out2), ("r3", plan3, out3)):
    ex = Executor(source, chat=chat, embedder=embedder)
    t_before, _ = ex.execute(before)
    t_after, _ = ex.execute(after)
    cols_b = [c.name for c in t_before.schema.columns]
    cols_a = [c.name for c in t_after.schema.columns]
    check(f"rewrite {name} same columns", sorted(cols_b) == sorted(cols_a))
    order = [cols_a.index(c) for c in cols_b]
    rows_a = sorted(tuple(r[i] for i in order) for r in t_after.rows)
    rows_b = sorted(t_before.rows)
    check(f"rewrite {name} same rows", rows_a == rows_b, f"{len(rows_b)} rows")

# ---- guarded mode: applied events never raise cost ----
registry = [
    ModelSpec("tiny", 1e-06, 2e-06, 0.8, 1),
    ModelSpec("big", 1e-05, 2e-05, 0.95, 2),
]
analyzer = SelectivityAnalyzer(source, chat=chat, embedder=embedder, registry=registry)
cost_model = CostModel(source, analyzer, embedder=embedder)
out2g, events2g = apply_rules(plan2, cost_model=cost_model, model=registry[-1], store=source)
check("guarded rule run applied something", any(e.applied for e in events2g))
check(
    "guarded rules never raise cost",
    all(e.cost_after <= e.cost_before + 1e-12 for e in events2g if e.applied),
    "; ".join(f"{e.rule}:{e.cost_before:.6g}->{e.cost_after:.6g}" for e in events2g if e.applied),
)

# ---- DP vs brute force over random join graphs ----


def brute_force(rows, edges):
    n = len(rows)

    def card(mask):
        value = 1.0
        for i in range(n):
            if mask >> i & 1:
                value *= rows[i]
        for pair, sel in edges.items():
            i, j = tuple(pair)
            if mask >> i & 1 and mask >> j & 1:
                value *= sel
        return value

    best = {1 << i: 0.0 for i in range(n)}
    full = (1 << n) - 1
    for size in range(2, n + 1):
        for mask in range(1, full + 1):
            if bin(mask).count("1") != size:
                continue
            for s1 in range(1, mask):
                if s1 & mask != s1:
                    continue
                s2 = mask ^ s1
                if s1 not in best or s2 not in best:
                    continue
                crossing = any(
                    (s1 >> i & 1 and s2 >> j & 1) or (s2 >> i & 1 and s1 >> j & 1)
                    for pair in edges
                    for i, j in (tuple(pair),)
                )
                if not crossing:
                    continue
                total = best[s1] + best[s2] + card(mask)
                if mask not in best or total < best[mask]:
                    best[mask] = total
    return best.get(full)


rng = random.Random(7)
for trial in range(60):
    n = rng.randint(2, 6)
    rows = [float(rng.randint(1, 2000)) for _ in range(n)]
    edges = {}
    nodes = list(range(n))
    rng.shuffle(nodes)
    for a, b in zip(nodes, nodes[1:]):  # spanning path keeps the graph connected
        edges[frozenset((a, b))] = rng.choice([0.001, 0.01, 0.1, 0.5, 1.0])
    for a, b in itertools.combinations(range(n), 2):
        if frozenset((a, b)) not in edges and rng.random() < 0.3:
            edges[frozenset((a, b))] = rng.choice([0.001, 0.01, 0.1, 0.5])
    got = dp_best_order(rows, edges)
    want = brute_force(rows, edges)
    assert got is not None
    if not math.isclose(got[1], want, rel_tol=1e-09):
        check(f"dp trial {trial}", False, f"{got[1]} vs {want}")
check("dp matches brute force on 60 random graphs", True)

check("dp disconnected graph refused", dp_best_order([10.0, 20.0], {}) is None)

# ---- order_joins end to end ----
sa = Schema.of(("ak", "integer"), ("av", "integer"))
sb = Schema.of(("bk", "integer"),)
sc = Schema.of(("ck", "integer"),)
source2 = TableSource()
source2.add("ta", Table(sa, [(i % 4, i) for i in range(48)]))
source2.add("tb", Table(sb, [(i,) for i in range(4)]))
source2.add("tc", Table(sc, [(i % 4,) for i in range(8)]))

join_plan = Plan(
    PlanNode(
        5,
        Op.JOIN,
        {"mode": "inner", "condition": Call("==", (Col("bk"), Col("ck")))},
        (
            PlanNode(
                4,
                Op.JOIN,
                {"mode": "inner", "condition": Call("==", (Col("ak"), Col("bk")))},
                (scan(1, "ta"), scan(2, "tb")),
            ),
            scan(3, "tc"),
        ),
    )
)
assert not validate_grammar(join_plan, source2)
analyzer2 = SelectivityAnalyzer(source2, chat=chat, embedder=embedder, registry=registry)
cm2 = CostModel(source2, analyzer2, embedder=embedder)
ordered_plan, join_trace = order_joins(join_plan, cm2)
print("join trace:", join_trace)
check("join block discovered", len(join_trace) == 1 and join_trace[0]["relations"] == ["ta", "tb", "tc"])


def all_ids(node):
    out = [node.node_id]
    for c in node.children:
        out.extend(all_ids(c))
    return out


check("join reorder keeps node ids", sorted(all_ids(ordered_plan.root)) == sorted(all_ids(join_plan.root)))
ex_a = Executor(source2)
t_orig, _ = ex_a.execute(join_plan)
t_new, _ = ex_a.execute(ordered_plan)
cols_o = [c.name for c in t_orig.schema.columns]
cols_n = [c.name for c in t_new.schema.columns]
check("join reorder same columns", sorted(cols_o) == sorted(cols_n))
perm = [cols_n.index(c) for c in cols_o]
check(
    "join reorder same rows",
    sorted(t_orig.rows) == sorted(tuple(r[i] for i in perm) for r in t_new.rows),
    f"{len(t_orig.rows)} rows",
)

# ---- greedy model selection ----
sel_plan = Plan(
    PlanNode(
        5,
        Op.UNION,
        {},
        (
            PlanNode(
                2,
                Op.SEM_FILTER,
                {"columns": ("note",), "predicate_prompt": "mentions delivery"},
                (scan(1, "payments"),),
            ),
            PlanNode(
                4,
                Op.SEM_FILTER,
                {"columns": ("note",), "predicate_prompt": "mentions delivery"},
                (scan(3, "payments"),),
            ),
        ),
    )
)
analyzer3 = SelectivityAnalyzer(source, chat=chat, embedder=embedder, registry=registry)
cm3 = CostModel(source, analyzer3, embedder=embedder)
assign_tight, steps_tight = select_models(sel_plan, registry, cm3, epsilon=0.05)
check(
    "selection eps=0.05 keeps top tier",
    all(m.model_name == "big" for m in assign_tight.values()),
    str({k: m.model_name for k, m in sorted(assign_tight.items())}),
)
assign_loose, steps_loose = select_models(sel_plan, registry, cm3, epsilon=0.20)
downgraded = sorted(k for k, m in assign_loose.items() if m.model_name == "tiny")
check(
    "selection eps=0.20 downgrades exactly the lowest-id op",
    downgraded == [2],
    str({k: m.model_name for k, m in sorted(assign_loose.items())}),
)
check("selection trace records one applied step", len(steps_loose) == 1 and steps_loose[0].node_id == 2)

# ---- estimator vs executor cost parity (constant-width values) ----
pin_cfg = dataclasses.replace(OptimizerConfig(), out_tokens_sem_filter=1)
one_model = [ModelSpec("solo", 1e-06, 2e-06, 0.9, 1)]
pin_plan = Plan(
    PlanNode(
        2,
        Op.SEM_FILTER,
        {"columns": ("note",), "predicate_prompt": "mentions delivery"},
        (scan(1, "payments"),),
    )
)
an4 = SelectivityAnalyzer(source, chat=chat, embedder=embedder, registry=one_model, config=pin_cfg)
cm4 = CostModel(source, an4, embedder=embedder, config=pin_cfg)
assignment = uniform_assignment(pin_plan, one_model[0])
est = cm4.estimate(pin_plan, assignment)
ex4 = Executor(source, chat=chat, embedder=embedder, registry=one_model, assignment=assignment)
_, report = ex4.execute(pin_plan)
incurred = report.total_cost
check(
    "estimated cost equals incurred cost bitwise",
    est.total_cost == incurred,
    f"est={est.total_cost!r} incurred={incurred!r}",
)

# ---- full pipeline ----
opt = optimize(plan2, source=source, chat=chat, embedder=embedder, registry=registry)
check("pipeline returns improved-or-equal cost",
      opt.cost_after.total_cost <= opt.cost_before.total_cost + 1e-12,
      f"{opt.cost_before.total_cost:.6g} -> {opt.cost_after.total_cost:.6g}")
check("pipeline assignment covers semantic ops", len(opt.assignment) == 2)
round_trip = serialize_plan(opt.plan)
check("optimized plan serializes", isinstance(round_trip, str) and '"version":1' in round_trip)

print("optimizer smoke OK")
