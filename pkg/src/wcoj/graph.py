"""Joins for queries whose relations have at most two attributes.

An optimal basic cover of a graph is half-integral: its weight-1 edges form
stars and its weight-1/2 edges form vertex-disjoint odd cycles.  Stars are
joined directly, each odd cycle is reduced to a (bundled) triangle, and the
pieces are combined by cross product and filtered by the unused edges.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from .cover import GraphCoverDecomposition, graph_cover_decompose
from .lw import LwStats, TriangleStats, lw_join, triangle_join
from .relation import JoinQuery, Relation, SchemaError, natural_join, project


@dataclass
class GraphStats:
    work: int = 0
    out_size: int = 0
    log_bound: float = 0.0
    cycles: list[dict] = field(default_factory=list)


def _cycle_walk(relations: Sequence[Relation]) -> tuple[list[str], list[Relation]]:
    """Vertices ``v_1..v_c`` and relations with ``rels[i]`` over ``(v_{i+1}, v_{i+2})`` cyclically."""
    if len(relations) < 3:
        raise SchemaError("a cycle needs at least three relations")
    adj: dict[str, list[int]] = defaultdict(list)
    for i, r in enumerate(relations):
        if r.arity != 2:
            raise SchemaError(f"cycle relation {r!r} is not binary")
        for a in r.schema:
            adj[a].append(i)
    if len(adj) != len(relations) or any(len(v) != 2 for v in adj.values()):
        raise SchemaError("relations do not form a simple cycle")
    first = relations[0]
    verts = [first.schema[0], first.schema[1]]
    order = [0]
    while True:
        cur = verts[-1]
        nxt = next(i for i in adj[cur] if i != order[-1])
        if nxt == 0:
            break
        order.append(nxt)
        (other,) = set(relations[nxt].schema) - {cur}
        verts.append(other)
    if len(order) != len(relations):
        raise SchemaError("relations form more than one cycle")
    verts.pop()  # the walk returned to v_1
    rels = [relations[i].reorder((verts[j], verts[(j + 1) % len(verts)])) for j, i in enumerate(order)]
    return verts, rels


def _filter(rows: list[tuple], schema: Sequence[str], rel: Relation) -> list[tuple]:
    pos = [list(schema).index(a) for a in rel.schema]
    keep = rel.rows
    return [t for t in rows if tuple(t[p] for p in pos) in keep]


def _product(parts: Sequence[Relation]) -> tuple[list[str], list[tuple]]:
    schema: list[str] = []
    rows: list[tuple] = [()]
    for p in parts:
        schema += list(p.schema)
        rows = [t + u for t in rows for u in p.rows]
    return schema, rows


def cycle_join(relations: Sequence[Relation], stats: GraphStats | None = None) -> Relation:
    """Join of binary relations forming one simple cycle."""
    stats = stats if stats is not None else GraphStats()
    verts, rels = _cycle_walk(relations)
    c = len(rels)
    sizes = [len(r) for r in rels]
    info: dict = {"length": c}
    stats.cycles.append(info)
    if any(s == 0 for s in sizes):
        info["kind"] = "empty"
        return Relation(tuple(verts), ())
    total = math.prod(sizes)
    if c % 2 == 0:
        odd, even = rels[0::2], rels[1::2]
        p_odd, p_even = math.prod(sizes[0::2]), math.prod(sizes[1::2])
        base, rest = (odd, even) if p_odd <= p_even else (even, odd)
        assert math.prod(len(r) for r in base) == min(p_odd, p_even)
        info.update(kind="even", product=min(p_odd, p_even))
        schema, rows = _product(base)
        stats.work += len(rows)
        for r in rest:
            rows = _filter(rows, schema, r)
            stats.work += len(rows)
        return Relation(schema, rows).reorder(verts)
    if c == 3:
        info["kind"] = "triangle"
        lws = LwStats()
        out = lw_join(JoinQuery.from_relations(rels, verts), stats=lws)
        stats.work += lws.work
        return out
    # odd cycle of length 2k'+1 >= 5; the path e_1..e_{2k'} alternates between two classes
    path = rels[:-1]
    if math.prod(sizes[0:c - 1:2]) > math.prod(sizes[1:c - 1:2]):
        verts = list(reversed(verts))
        rels = [r.reorder(tuple(reversed(r.schema))) for r in reversed(path)] + [rels[-1].reorder((verts[-1], verts[0]))]
        sizes = [len(r) for r in rels]
    kp = (c - 1) // 2
    odd_edges = rels[0:2 * kp:2]  # e_1, e_3, ..., e_{2k'-1}
    mid_edges = rels[1:2 * kp - 1:2]  # e_2, ..., e_{2k'-2}
    e_last_even, e_close = rels[2 * kp - 1], rels[2 * kp]  # e_{2k'}, e_{2k'+1}
    x_schema, x_rows = _product(odd_edges)
    stats.work += len(x_rows)
    x_rel = Relation(x_schema, x_rows)
    s_attrs = verts[1:2 * kp - 1]
    w_rel = project(x_rel, s_attrs)
    w_rows = list(w_rel.rows)
    for r in mid_edges:
        w_rows = _filter(w_rows, w_rel.schema, r)
    stats.work += len(w_rel) + len(w_rows)
    w_rel = Relation(w_rel.schema, w_rows)
    n_even, n_close = len(e_last_even), len(e_close)
    first_ok = (len(w_rel) * n_even) ** 2 <= total
    second_ok = (len(w_rel) * n_close) ** 2 <= total
    assert first_ok or second_ok, "neither bundling choice stays within the cycle bound"
    info.update(kind="odd", W=len(w_rel), bundle="even" if first_ok else "close")
    if first_ok:
        y_schema, y_rows = _product([w_rel, e_last_even])
        third = e_close
    else:
        y_schema, y_rows = _product([w_rel, e_close])
        third = e_last_even
    stats.work += len(y_rows)
    tri = TriangleStats()
    out = triangle_join(x_rel, Relation(y_schema, y_rows), third, stats=tri)
    stats.work += tri.work
    return out.reorder(verts)


def collapse_parallel(q: JoinQuery) -> JoinQuery:
    """Intersect relations defined over the same attribute set."""
    groups: dict[frozenset, list[Relation]] = {}
    for r in q.relations:
        groups.setdefault(frozenset(r.schema), []).append(r)
    merged = []
    for rels in groups.values():
        base = rels[0]
        rows = set(base.rows)
        for other in rels[1:]:
            rows &= other.reorder(base.schema).rows
        name = "&".join(r.name or "?" for r in rels) if len(rels) > 1 else base.name
        merged.append(Relation(base.schema, rows, name))
    return JoinQuery(tuple(merged), q.attributes, q.dictionary)


def graph_join(q: JoinQuery, stats: GraphStats | None = None) -> Relation:
    """Join of a query whose relations all have at most two attributes."""
    stats = stats if stats is not None else GraphStats()
    if any(r.arity > 2 for r in q.relations):
        raise SchemaError("graph_join needs every relation to have at most two attributes")
    if q.has_empty_relation():
        stats.work = q.m
        return q.empty_output()
    q2 = collapse_parallel(q)
    if q2.has_empty_relation():
        stats.work = q.m
        return q.empty_output()
    dec: GraphCoverDecomposition = graph_cover_decompose(q2)
    stats.log_bound = dec.objective
    parts: list[Relation] = []
    for comp in dec.stars:
        rel = q2.relations[comp[0]]
        for i in comp[1:]:
            rel = natural_join(rel, q2.relations[i])
        stats.work += sum(len(q2.relations[i]) for i in comp) + len(rel)
        parts.append(rel)
    for cyc in dec.cycles:
        parts.append(cycle_join([q2.relations[i] for i in cyc], stats))
    # cross product of the pieces, applying each unused edge as soon as it is fully bound
    pending = [q2.relations[i] for i in dec.zeros]
    schema: list[str] = []
    rows: list[tuple] = [()]
    for p in sorted(parts, key=len):
        schema += list(p.schema)
        rows = [t + u for t in rows for u in p.rows]
        stats.work += len(rows)
        bound = set(schema)
        ready = [r for r in pending if set(r.schema) <= bound]
        pending = [r for r in pending if not set(r.schema) <= bound]
        for r in ready:
            rows = _filter(rows, schema, r)
            stats.work += len(rows)
        if not rows:
            break
    if not rows:
        return q.empty_output()
    out = Relation(schema, rows).reorder(q.attributes)
    stats.out_size = len(out)
    return out
