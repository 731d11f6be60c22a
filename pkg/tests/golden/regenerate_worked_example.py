"""Rebuild worked_example.json: the six-attribute, five-relation example with 5 tuples per relation.

The data seed was found by searching for an instance whose trace contains a
leaf intersection plus both split cases at the nodes anchored on ``d`` and
on ``e``.  Run from the repository root after an intentional engine change.
"""
from __future__ import annotations

import json
import random
from fractions import Fraction
from pathlib import Path

from wcoj.generic import join_with_stats
from wcoj.relation import JoinQuery, Relation

SCHEMAS = {"a": "1245", "b": "1346", "c": "123", "d": "246", "e": "356"}
SEED = 18173


def build() -> dict:
    rng = random.Random(SEED)
    data = {}
    for name, schema in SCHEMAS.items():
        rows: set[tuple[int, ...]] = set()
        while len(rows) < 5:
            rows.add(tuple(rng.randint(0, 2) for _ in schema))
        data[name] = sorted(rows)
    q = query_of({"relations": {k: {"schema": list(v), "rows": data[k]} for k, v in SCHEMAS.items()}})
    out, stats = join_with_stats(q, [Fraction(1, 2)] * 5, [0, 1, 2, 3, 4], trace=True)
    return {
        "attributes": list("123456"),
        "relations": {k: {"schema": list(v), "rows": [list(r) for r in data[k]]} for k, v in SCHEMAS.items()},
        "cover": ["1/2"] * 5,
        "edge_order": [0, 1, 2, 3, 4],
        "total_order": stats.total_order,
        "output": [list(r) for r in out.sorted_rows()],
        "trace": stats.trace,
    }


def query_of(doc: dict) -> JoinQuery:
    rels = [Relation(tuple(v["schema"]), [tuple(r) for r in v["rows"]], k) for k, v in doc["relations"].items()]
    return JoinQuery.from_relations(rels, tuple("123456"))


if __name__ == "__main__":
    path = Path(__file__).with_name("worked_example.json")
    doc = build()
    # one line per relation and per trace event keeps diffs readable
    parts = []
    for key, val in doc.items():
        if isinstance(val, dict):
            inner = ",\n".join(f"  {json.dumps(k)}: {json.dumps(v)}" for k, v in val.items())
            parts.append(f" {json.dumps(key)}: {{\n{inner}\n }}")
        elif key == "trace":
            inner = ",\n".join(f"  {json.dumps(ev)}" for ev in val)
            parts.append(f" {json.dumps(key)}: [\n{inner}\n ]")
        else:
            parts.append(f" {json.dumps(key)}: {json.dumps(val)}")
    path.write_text("{\n" + ",\n".join(parts) + "\n}\n", encoding="utf-8")
    print(f"wrote {path}")
