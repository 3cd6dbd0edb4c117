"""Generate the bundled sample workspace under samples/.

Deterministic by construction: every value is a fixed function of the row
index, so re-running the script reproduces the same bytes.
"""

from __future__ import annotations

import json
import sqlite3
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent
SAMPLES = ROOT / "samples"

MERCHANTS = [
    ("acme", "west", "phoenix"),
    ("bluebird", "east", "albany"),
    ("cobalt", "west", "denver"),
    ("dynamo", "south", "austin"),
    ("ember", "east", "boston"),
    ("falcon", "north", "fargo"),
    ("globex", "south", "miami"),
    ("harbor", "north", "seattle"),
]

PLANS = ["basic", "plus", "enterprise"]

NOTES = [
    "standard checkout completed without issue",
    "late fee charged after the grace period lapsed",
    "bulk order discount applied at settlement",
    "refund issued for a damaged item on arrival",
    "subscription renewal billed to the card on file",
    "priority shipping upgrade purchased at checkout",
    "gift card balance applied before the card charge",
    "chargeback opened, customer disputes the refund amount",
    "invoice paid by bank transfer after two reminders",
    "promotional credit consumed during the flash sale",
]

MANUAL = """\
Payment operations manual.

Every merchant settles daily. Disputes pause settlement for the affected
payment only; the remaining balance transfers on the normal schedule.

Fees are billed monthly per subscription tier. The schedule below applies
to all merchants from January onward.

| tier | monthly_fee | transaction_pct |
|------|-------------|-----------------|
| basic | 20 | 2.9 |
| plus | 60 | 2.2 |
| enterprise | 150 | 1.4 |

Refund handling. A refund must reference the original payment id and is
matched against it during reconciliation. Refunds older than 30 days
require a manual review by the operations team.

Chargebacks. When a cardholder disputes a payment, the amount is held in
escrow until the dispute resolves. Merchants on the enterprise tier get a
dedicated dispute queue with a 48 hour first-response target.

Regional notes. Settlement currency follows the merchant region; west and
east regions settle in dollars on the next business day, north and south
within two business days.
"""

ORDERS = [
    (1, "orbit retail", "retail", 420.0),
    (2, "nimbus goods", "online", 180.5),
    (3, "quarry supply", "wholesale", 1250.0),
    (4, "orbit retail", "retail", 95.25),
    (5, "lumen shop", "online", 310.0),
    (6, "quarry supply", "wholesale", 2200.0),
    (7, "vista market", "retail", 150.75),
    (8, "nimbus goods", "online", 89.99),
    (9, "granite trade", "wholesale", 1760.4),
    (10, "vista market", "retail", 240.1),
    (11, "lumen shop", "online", 55.5),
    (12, "granite trade", "wholesale", 990.0),
]

MODELS_YAML = """\
- model_name: scout
  fee_in: 1.0e-06
  fee_out: 2.0e-06
  quality: 0.82
  tier: 1
- model_name: ranger
  fee_in: 4.0e-06
  fee_out: 8.0e-06
  quality: 0.9
  tier: 2
- model_name: atlas
  fee_in: 1.0e-05
  fee_out: 2.0e-05
  quality: 0.97
  tier: 3
"""

CONFIG_YAML = """\
connectors:
  - name: files
    kind: files
    locator: ./data
  - name: warehouse
    kind: sqlite
    locator: ./warehouse.db

provider:
  mode: replay

model_registry: ./models.yaml

optimizer:
  epsilon_quality: 0.05

planner:
  max_iterations: 5
  n_per_kind: 3

paths:
  catalog_store: .state/catalog
  memory_store: .state/memory
  fixtures: ./fixtures
"""


def payments_rows():
    rows = []
    for i in range(1, 41):
        merchant = MERCHANTS[(i - 1) % len(MERCHANTS)][0]
        plan = PLANS[(i - 1) % len(PLANS)]
        amount = round(5 + ((i * 37) % 199) / 4, 2)
        note = NOTES[(i - 1) % len(NOTES)]
        rows.append((i, amount, merchant, plan, note))
    return rows


def scan(node_id: int, dataset: str) -> dict:
    return {
        "id": node_id,
        "op": "FileScan",
        "attrs": {"dataset": dataset, "format": "csv"},
        "children": [],
    }


def col(name: str) -> dict:
    return {"col": name}


def lit(value, type_: str) -> dict:
    return {"lit": value, "type": type_}


def eq(a: dict, b: dict) -> dict:
    return {"op": "==", "args": [a, b]}


def plan_doc(root: dict) -> dict:
    return {"version": 1, "root": root}


SUITE = [
    {
        "id": "q01",
        "question": "show the five largest payments",
        "plan": plan_doc(
            {
                "id": 3,
                "op": "Limit",
                "attrs": {"k": 5},
                "children": [
                    {
                        "id": 2,
                        "op": "Sort",
                        "attrs": {"keys": ["amount"], "directions": ["desc"]},
                        "children": [scan(1, "payments")],
                    }
                ],
            }
        ),
    },
    {
        "id": "q02",
        "question": "total payment amount per merchant",
        "plan": plan_doc(
            {
                "id": 3,
                "op": "Sort",
                "attrs": {"keys": ["merchant"], "directions": ["asc"]},
                "children": [
                    {
                        "id": 2,
                        "op": "Aggregate",
                        "attrs": {
                            "keys": ["merchant"],
                            "aggs": [["sum", "amount", "total_amount"]],
                        },
                        "children": [scan(1, "payments")],
                    }
                ],
            }
        ),
    },
    {
        "id": "q03",
        "question": "how many payments came from each merchant region",
        "plan": plan_doc(
            {
                "id": 5,
                "op": "Sort",
                "attrs": {"keys": ["region"], "directions": ["asc"]},
                "children": [
                    {
                        "id": 4,
                        "op": "Aggregate",
                        "attrs": {
                            "keys": ["region"],
                            "aggs": [["count", "pid", "payments"]],
                        },
                        "children": [
                            {
                                "id": 3,
                                "op": "Join",
                                "attrs": {
                                    "mode": "inner",
                                    "condition": eq(col("merchant"), col("mname")),
                                },
                                "children": [scan(1, "payments"), scan(2, "merchants")],
                            }
                        ],
                    }
                ],
            }
        ),
    },
    {
        "id": "q04",
        "question": "list payments whose note mentions a refund",
        "plan": plan_doc(
            {
                "id": 3,
                "op": "Project",
                "attrs": {
                    "items": [
                        ["pid", col("pid")],
                        ["amount", col("amount")],
                        ["note", col("note")],
                    ]
                },
                "children": [
                    {
                        "id": 2,
                        "op": "SemFilter",
                        "attrs": {
                            "columns": ["note"],
                            "predicate_prompt": "the note mentions a refund",
                        },
                        "children": [scan(1, "payments")],
                    }
                ],
            }
        ),
    },
    {
        "id": "q05",
        "question": "label each payment note with a short theme",
        "plan": plan_doc(
            {
                "id": 3,
                "op": "Project",
                "attrs": {
                    "items": [
                        ["pid", col("pid")],
                        ["note", col("note")],
                        ["group_label", col("group_label")],
                    ]
                },
                "children": [
                    {
                        "id": 2,
                        "op": "SemGroup",
                        "attrs": {
                            "columns": ["note"],
                            "label_prompt": "a short theme for the payment note",
                            "max_labels": 4,
                        },
                        "children": [scan(1, "payments")],
                    }
                ],
            }
        ),
    },
    {
        "id": "q06",
        "question": "what is the average payment amount",
        "plan": plan_doc(
            {
                "id": 2,
                "op": "Aggregate",
                "attrs": {"keys": [], "aggs": [["avg", "amount", "avg_amount"]]},
                "children": [scan(1, "payments")],
            }
        ),
    },
    {
        "id": "q07",
        "question": "which merchants operate in the west region",
        "plan": plan_doc(
            {
                "id": 3,
                "op": "Sort",
                "attrs": {"keys": ["mname"], "directions": ["asc"]},
                "children": [
                    {
                        "id": 2,
                        "op": "Filter",
                        "attrs": {
                            "predicate": eq(col("region"), lit("west", "text"))
                        },
                        "children": [scan(1, "merchants")],
                    }
                ],
            }
        ),
    },
    {
        "id": "q08",
        "question": "what monthly fee does the enterprise tier carry",
        "plan": plan_doc(
            {
                "id": 3,
                "op": "Project",
                "attrs": {
                    "items": [
                        ["tier", col("tier")],
                        ["monthly_fee", col("monthly_fee")],
                    ]
                },
                "children": [
                    {
                        "id": 2,
                        "op": "Filter",
                        "attrs": {
                            "predicate": eq(col("tier"), lit("enterprise", "text"))
                        },
                        "children": [scan(1, "manual_table_1")],
                    }
                ],
            }
        ),
    },
    {
        "id": "q09",
        "question": "show each payment amount with its tier monthly fee",
        "plan": plan_doc(
            {
                "id": 5,
                "op": "Sort",
                "attrs": {"keys": ["pid"], "directions": ["asc"]},
                "children": [
                    {
                        "id": 4,
                        "op": "Project",
                        "attrs": {
                            "items": [
                                ["pid", col("pid")],
                                ["amount", col("amount")],
                                ["plan", col("plan")],
                                ["monthly_fee", col("monthly_fee")],
                            ]
                        },
                        "children": [
                            {
                                "id": 3,
                                "op": "Join",
                                "attrs": {
                                    "mode": "inner",
                                    "condition": eq(col("plan"), col("tier")),
                                },
                                "children": [
                                    scan(1, "payments"),
                                    scan(2, "manual_table_1"),
                                ],
                            }
                        ],
                    }
                ],
            }
        ),
    },
    {
        "id": "q10",
        "question": "how many orders fall in each customer segment",
        "plan": plan_doc(
            {
                "id": 1,
                "op": "DBScan",
                "attrs": {
                    "connector": "warehouse",
                    "sql_text": (
                        "SELECT segment, COUNT(*) AS orders FROM orders "
                        "GROUP BY segment ORDER BY segment"
                    ),
                },
                "children": [],
            }
        ),
    },
]

# two-iteration scenario: the first plan names a column the warehouse does
# not have; the error surfaces at execution and steers the second attempt
SCENARIO = {
    "id": "s01",
    "question": "total order value per customer segment",
    "broken_plan": plan_doc(
        {
            "id": 1,
            "op": "DBScan",
            "attrs": {
                "connector": "warehouse",
                "sql_text": (
                    "SELECT tier, SUM(total) AS value FROM orders "
                    "GROUP BY tier ORDER BY tier"
                ),
            },
            "children": [],
        }
    ),
    "fixed_plan": plan_doc(
        {
            "id": 1,
            "op": "DBScan",
            "attrs": {
                "connector": "warehouse",
                "sql_text": (
                    "SELECT segment, SUM(total) AS value FROM orders "
                    "GROUP BY segment ORDER BY segment"
                ),
            },
            "children": [],
        }
    ),
}


def main():
    data = SAMPLES / "data"
    plans_dir = SAMPLES / "plans"
    data.mkdir(parents=True, exist_ok=True)
    plans_dir.mkdir(parents=True, exist_ok=True)

    lines = ["pid,amount,merchant,plan,note"]
    for pid, amount, merchant, plan, note in payments_rows():
        lines.append(f"{pid},{amount},{merchant},{plan},{note}")
    (data / "payments.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    lines = ["mname,region,city"]
    for mname, region, city in MERCHANTS:
        lines.append(f"{mname},{region},{city}")
    (data / "merchants.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")

    (data / "manual.txt").write_text(MANUAL, encoding="utf-8")

    db_path = SAMPLES / "warehouse.db"
    if db_path.exists():
        db_path.unlink()
    conn = sqlite3.connect(db_path)
    conn.execute(
        "CREATE TABLE orders (oid INTEGER PRIMARY KEY, customer TEXT, "
        "segment TEXT, total REAL)"
    )
    conn.executemany("INSERT INTO orders VALUES (?, ?, ?, ?)", ORDERS)
    conn.commit()
    conn.close()

    (SAMPLES / "models.yaml").write_text(MODELS_YAML, encoding="utf-8")
    (SAMPLES / "semaflow.yaml").write_text(CONFIG_YAML, encoding="utf-8")

    (SAMPLES / "suite.json").write_text(
        json.dumps(SUITE, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )
    (SAMPLES / "suite.txt").write_text(
        "".join(f"{entry['question']}\n" for entry in SUITE), encoding="utf-8"
    )
    (SAMPLES / "scenario.json").write_text(
        json.dumps(SCENARIO, indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )

    refunds = next(e for e in SUITE if e["id"] == "q04")
    (plans_dir / "refund_payments.json").write_text(
        json.dumps(refunds["plan"], indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )

    print(f"samples written under {SAMPLES}")


if __name__ == "__main__":
    main()
