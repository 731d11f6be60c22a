from __future__ import annotations

import itertools
import json
import random
from pathlib import Path

from hypothesis import strategies as st

from wcoj.preprocess import Atom, Fd, Var
from wcoj.relation import JoinQuery, Relation
from wcoj.workbench.generators import gen_random_instance, gen_triangle_instance


def triangle_trap(N: int = 4) -> JoinQuery:
    """Triangle whose pairwise joins are quadratic while the full join is empty."""
    return gen_triangle_instance(N).query


@st.composite
def queries(draw, max_n: int = 4, max_m: int = 4, max_rows: int = 8, domain: int = 3, max_arity: int | None = None):
    seed = draw(st.integers(0, 2**32 - 1))
    rng = random.Random(seed)
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, max_m))
    return gen_random_instance(rng, n, m, max_rows, domain, max_arity)


GOLDEN = Path(__file__).with_name("golden") / "worked_example.json"
SIX_SCHEMAS = {"a": "1245", "b": "1346", "c": "123", "d": "246", "e": "356"}


def six_attribute_query(rows: dict | None = None, seed: int = 0, size: int = 5, domain: int = 2) -> JoinQuery:
    """The five-edge, six-attribute worked instance; random rows unless given."""
    r = random.Random(seed)
    rels = []
    for name, schema in SIX_SCHEMAS.items():
        data = rows[name] if rows else [tuple(r.randint(0, domain) for _ in schema) for _ in range(size)]
        rels.append(Relation(tuple(schema), [tuple(t) for t in data], name))
    return JoinQuery.from_relations(rels, tuple("123456"))


def golden_doc() -> dict:
    return json.loads(GOLDEN.read_text(encoding="utf-8"))


def golden_query() -> JoinQuery:
    doc = golden_doc()
    return six_attribute_query({k: v["rows"] for k, v in doc["relations"].items()})


# -- query preprocessing -----------------------------------------------------


def evaluate_by_assignment(atoms, db, head) -> set[tuple]:
    """Reference semantics: try every assignment of active-domain values to the variables."""
    domain = sorted({v for rows in db.values() for row in rows for v in row})
    out = set()
    for values in itertools.product(domain, repeat=len(head)):
        env = dict(zip(head, values))
        ok = all(
            tuple(env[t.name] if isinstance(t, Var) else t for t in a.terms) in {tuple(r) for r in db[a.relation]}
            for a in atoms
        )
        if ok:
            out.add(values)
    return out


def random_full_query(rng: random.Random):
    """Atoms with constants and repeated variables over a small random database."""
    db = {}
    for name in "RST":
        arity = rng.randint(1, 3)
        db[name] = [tuple(rng.randint(0, 2) for _ in range(arity)) for _ in range(rng.randint(0, 8))]
    variables = ["x", "y", "z", "w"][: rng.randint(1, 4)]
    atoms = []
    for _ in range(rng.randint(1, 4)):
        name = rng.choice("RST")
        arity = len(db[name][0]) if db[name] else rng.randint(1, 3)
        atoms.append(Atom(name, [Var(rng.choice(variables)) if rng.random() < 0.75 else rng.randint(0, 2) for _ in range(arity)]))
    used = list(dict.fromkeys(v for a in atoms for v in a.variables))
    if not used:
        atoms.append(Atom("R", [Var("x")] * (len(db["R"][0]) if db["R"] else 1)))
        used = ["x"]
    return atoms, db, used


def random_fd_instance(rng: random.Random):
    """Random query whose data satisfies each declared FD inside its own relation."""
    attrs = ["A", "B", "C", "D"][: rng.randint(2, 4)]
    funcs = {}
    fds = []
    schemas = []
    for _ in range(rng.randint(2, 4)):
        schemas.append(rng.sample(attrs, rng.randint(1, len(attrs))))
    for a in attrs:
        if not any(a in s for s in schemas):
            schemas[0].append(a)
    for i, s in enumerate(schemas):
        if len(s) >= 2 and rng.random() < 0.7:
            u, v = rng.sample(s, 2)
            fds.append(Fd(i, u, v))
            funcs.setdefault((u, v), {x: rng.randint(0, 3) for x in range(4)})
    rels = []
    for i, s in enumerate(schemas):
        rows = []
        for _ in range(rng.randint(1, 10)):
            row = {a: rng.randint(0, 3) for a in s}
            for f in fds:
                if f.edge == i:
                    row[f.v] = funcs[(f.u, f.v)][row[f.u]]
            rows.append(tuple(row[a] for a in s))
        rels.append(Relation(s, rows, f"R{i}"))
    return JoinQuery.from_relations(rels, attrs), fds


def fd_star_family(k: int, N: int, seed: int = 0) -> tuple[JoinQuery, list[Fd]]:
    """``R_i(A, B_i)`` and ``S_i(B_i, C)`` with ``A -> B_i`` inside each ``R_i``."""
    rng = random.Random(seed)
    rels, fds = [], []
    for i in range(1, k + 1):
        rels.append(Relation(("A", f"B{i}"), [(a, rng.randint(0, N)) for a in range(N)], f"R{i}"))
        fds.append(Fd(len(rels) - 1, "A", f"B{i}"))
    for i in range(1, k + 1):
        rels.append(Relation((f"B{i}", "C"), [(b, rng.randint(0, N)) for b in range(N)], f"S{i}"))
    attrs = ["A"] + [f"B{i}" for i in range(1, k + 1)] + ["C"]
    return JoinQuery.from_relations(rels, attrs), fds
