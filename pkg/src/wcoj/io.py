"""Relation and query files.

A relation file starts with ``#relation <name> <attr> ...`` and has one
tab-separated row per line.  A query file is JSON::

    {"attributes": [...], "edges": [[attr, ...], ...],
     "relations": {"0": "r0.tsv", ...}, "fds": [[edge, u, v], ...]}

A full conjunctive query uses ``atoms`` instead of ``edges``; each atom names
a stored relation and lists its terms, strings being variables, numbers
constants and ``{"const": value}`` any constant::

    {"relations": {"R": "r.tsv"}, "atoms": [{"relation": "R", "terms": ["x", "x", 3]}]}
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .preprocess import Atom, Fd, Var, fd_expand, reduce_full_query
from .relation import Dictionary, JoinQuery, Relation, SchemaError


def read_relation(path: str | Path, dictionary: Dictionary) -> Relation:
    path = Path(path)
    with path.open(encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split()
        if len(header) < 2 or header[0] != "#relation":
            raise SchemaError(f"{path}: first line must be '#relation <name> <attrs...>'")
        name, attrs = header[1], header[2:]
        rows = []
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            vals = line.split("\t")
            if len(vals) != len(attrs):
                raise SchemaError(f"{path}:{lineno}: expected {len(attrs)} values, got {len(vals)}")
            rows.append(tuple(dictionary.encode(v) for v in vals))
    return Relation(attrs, rows, name)


def write_relation(path: str | Path, rel: Relation, dictionary: Dictionary | None = None) -> None:
    dec = dictionary.decode if dictionary is not None else (lambda v: v)
    lines = [" ".join(["#relation", rel.name or "R", *rel.schema])]
    lines += ["\t".join(str(dec(v)) for v in row) for row in rel.sorted_rows()]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass
class LoadedQuery:
    query: JoinQuery
    fds: list[Fd] = field(default_factory=list)
    raw: dict = field(default_factory=dict)
    path: Path | None = None

    def expanded(self, missing: str = "error") -> JoinQuery:
        return fd_expand(self.query, self.fds, missing) if self.fds else self.query


def _term(t):
    if isinstance(t, dict):
        return t["const"]
    if isinstance(t, str):
        return Var(t)
    return t


def query_from_dict(doc: dict, base: Path, dictionary: Dictionary | None = None) -> LoadedQuery:
    dictionary = dictionary if dictionary is not None else Dictionary()
    rel_files = doc.get("relations", {})
    cache: dict[str, Relation] = {}

    def stored(key) -> Relation:
        key = str(key)
        if key not in rel_files:
            raise SchemaError(f"no file given for relation {key}")
        if key not in cache:
            cache[key] = read_relation(base / rel_files[key], dictionary)
        return cache[key]

    if "atoms" in doc:
        atoms = [Atom(str(a["relation"]), [_term(t) for t in a["terms"]]) for a in doc["atoms"]]
        db = {str(a.relation): [r for r in stored(a.relation).rows] for a in atoms}
        q = reduce_full_query(atoms, db, doc.get("head"), dictionary)
    else:
        edges = doc["edges"]
        rels = []
        for i, attrs in enumerate(edges):
            rel = stored(i)
            if set(rel.schema) != set(attrs) or len(attrs) != rel.arity:
                raise SchemaError(f"edge {i} lists {attrs} but its file has {list(rel.schema)}")
            rels.append(rel.reorder(attrs))
        q = JoinQuery.from_relations(rels, doc.get("attributes"), dictionary)
    fds = [Fd(int(e), str(u), str(v)) for e, u, v in doc.get("fds", [])]
    return LoadedQuery(q, fds, doc)


def load_query(path: str | Path, dictionary: Dictionary | None = None) -> LoadedQuery:
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    loaded = query_from_dict(doc, path.parent, dictionary)
    loaded.path = path
    return loaded


def save_query(directory: str | Path, q: JoinQuery, stem: str = "query", fds: Iterable = ()) -> Path:
    """Write one relation file per edge plus the query JSON; returns the JSON path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = {}
    for i, rel in enumerate(q.relations):
        fname = f"{stem}_{i}.tsv"
        write_relation(directory / fname, rel.renamed(rel.schema, q.edge_name(i)), q.dictionary)
        files[str(i)] = fname
    doc = {
        "attributes": list(q.attributes),
        "edges": [list(r.schema) for r in q.relations],
        "relations": files,
    }
    fds = [list(f) if not isinstance(f, Fd) else [f.edge, f.u, f.v] for f in fds]
    if fds:
        doc["fds"] = fds
    out = directory / f"{stem}.json"
    out.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return out
