"""Joins for Loomis-Whitney instances and the heavy/light triangle join.

In a Loomis-Whitney instance over ``n`` attributes there is one relation per
``(n-1)``-subset.  The join walks a binary tree whose leaves are the
attributes; every node returns a candidate set ``C`` of full tuples and a
deferred set ``D`` of tuples over the node's label.  Join keys whose
left-side fan-out stays under ``ceil(P / |D_R|)`` are expanded right away,
the rest are pushed up.  A final pass keeps only candidates all of whose
projections are present.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Sequence

from .relation import JoinQuery, Relation, SchemaError
from .trie import WorkCounter


class NotLoomisWhitney(SchemaError):
    pass


@dataclass
class LwStats:
    work: int = 0
    out_size: int = 0
    candidates: int = 0
    log_p: float = 0.0
    node_checks: list[dict] = field(default_factory=list)


@dataclass
class _Shape:
    leaves: tuple[int, ...]
    label: tuple[int, ...]  # attribute ids, ascending
    lc: _Shape | None = None
    rc: _Shape | None = None


def _shape(leaves: Sequence[int], n: int) -> _Shape:
    if len(leaves) == 1:
        return _Shape(tuple(leaves), tuple(a for a in range(n) if a != leaves[0]))
    mid = (len(leaves) + 1) // 2
    lc, rc = _shape(leaves[:mid], n), _shape(leaves[mid:], n)
    label = tuple(sorted(set(lc.label) & set(rc.label)))
    return _Shape(tuple(leaves), label, lc, rc)


def lw_relation_map(q: JoinQuery) -> dict[int, int]:
    """Map each attribute id ``v`` to the index of the relation over ``V \\ {v}``."""
    n = q.n
    if n < 2:
        raise NotLoomisWhitney("a Loomis-Whitney instance needs at least two attributes")
    if q.m != n:
        raise NotLoomisWhitney(f"expected {n} relations, got {q.m}")
    missing = {}
    full = frozenset(range(n))
    for i, e in enumerate(q.edges):
        rest = full - e
        if len(e) != n - 1 or len(rest) != 1:
            raise NotLoomisWhitney(f"relation {q.edge_name(i)} does not miss exactly one attribute")
        (v,) = rest
        if v in missing:
            raise NotLoomisWhitney(f"two relations miss attribute {q.attributes[v]}")
        missing[v] = i
    return missing


def ceil_ratio(sizes: Sequence[int], n: int, d: int) -> int:
    """Exact ``ceil(P / d)`` where ``P = (prod sizes)^(1/(n-1))``.

    It is the least integer ``c`` with ``(c * d)^(n-1) >= prod sizes``.
    """
    prod = math.prod(sizes)
    e = n - 1
    guess = max(1, int(math.exp((math.log(prod) / e) - math.log(d))) if prod > 0 else 0)
    c = max(guess - 2, 0)
    while (c * d) ** e < prod:
        c += 1
    while c > 0 and ((c - 1) * d) ** e >= prod:
        c -= 1
    return c


def lw_join(q: JoinQuery, check: bool = False, stats: LwStats | None = None) -> Relation:
    """Join of a Loomis-Whitney instance.

    With ``check`` the three per-node invariants (deferred set covers the
    missed output, candidate and deferred size limits) are asserted.
    """
    stats = stats if stats is not None else LwStats()
    counter = WorkCounter()
    missing = lw_relation_map(q)
    n = q.n
    if q.has_empty_relation():
        stats.work = q.m
        return q.empty_output()
    # each relation as tuples over its label in ascending attribute id order
    leaf_sets: dict[int, set[tuple[int, ...]]] = {}
    leaf_size: dict[int, int] = {}
    for v, i in missing.items():
        rel = q.relations[i]
        label = [a for a in range(n) if a != v]
        pos = rel.positions([q.attributes[a] for a in label])
        leaf_sets[v] = {tuple(r[p] for p in pos) for r in rel.rows}
        leaf_size[v] = len(rel)
        counter.steps += len(rel)
    sizes = [leaf_size[v] for v in range(n)]
    stats.log_p = sum(math.log(s) for s in sizes) / (n - 1)
    root = _shape(list(range(n)), n)
    node_records: list[tuple[_Shape, set, set]] = []

    def lw(x: _Shape) -> tuple[set[tuple[int, ...]], set[tuple[int, ...]]]:
        if x.lc is None:
            return set(), leaf_sets[x.leaves[0]]
        c_l, d_l = lw(x.lc)
        c_r, d_r = lw(x.rc)
        lab_l, lab_r, lab = x.lc.label, x.rc.label, x.label
        # positions of the shared label inside each side, and of the right side's extra attributes
        key_l = [lab_l.index(a) for a in lab]
        key_r = [lab_r.index(a) for a in lab]
        extra_r = [i for i, a in enumerate(lab_r) if a not in set(lab_l)]
        merged = sorted(set(lab_l) | set(lab_r))
        src = {a: (0, lab_l.index(a)) for a in lab_l}
        for i in extra_r:
            src[lab_r[i]] = (1, i)
        layout = [src[a] for a in merged]
        groups_l: dict[tuple, list[tuple]] = defaultdict(list)
        for t in d_l:
            groups_l[tuple(t[p] for p in key_l)].append(t)
        groups_r: dict[tuple, list[tuple]] = defaultdict(list)
        for t in d_r:
            groups_r[tuple(t[p] for p in key_r)].append(t)
        counter.steps += len(d_l) + len(d_r)
        is_root = x is root

        def combine(keys) -> set[tuple[int, ...]]:
            out = set()
            for key in keys:
                for tl in groups_l[key]:
                    for tr in groups_r[key]:
                        pair = (tl, tr)
                        out.add(tuple(pair[side][p] for side, p in layout))
            counter.steps += len(out)
            return out

        if len(d_r) == 0:
            f_set: set = set()
            g_set: set = set()
        else:
            f_set = set(groups_l) & set(groups_r)
            limit = ceil_ratio(sizes, n, len(d_r))
            g_set = {t for t in f_set if len(groups_l[t]) + 1 <= limit}
            counter.steps += len(f_set)
        if is_root:
            c = combine(set(groups_l) & set(groups_r)) | c_l | c_r
            d: set = set()
        else:
            c = combine(g_set) | c_l | c_r
            d = f_set - g_set
        counter.steps += len(c_l) + len(c_r)
        if check:
            node_records.append((x, c, d))
        return c, d

    cand, _ = lw(root)
    stats.candidates = len(cand)
    rel_sets = [(v, leaf_sets[v]) for v in range(n)]
    out_rows = []
    for t in cand:
        counter.steps += n
        if all(t[:v] + t[v + 1:] in s for v, s in rel_sets):
            out_rows.append(t)
    out = Relation(tuple(q.attributes), out_rows)
    if check:
        _check_nodes(node_records, out_rows, sizes, stats)
    counter.steps += len(out_rows)
    stats.work = counter.steps
    stats.out_size = len(out)
    return out


def _check_nodes(records, output, sizes, stats: LwStats) -> None:
    n = len(sizes)
    log_p = sum(math.log(s) for s in sizes) / (n - 1)
    out_set = set(output)
    for x, c, d in records:
        missed = out_set - c
        proj = {tuple(t[a] for a in x.label) for t in missed}
        assert proj <= d, f"deferred set at leaves {x.leaves} misses {sorted(proj - d)[:3]}"
        leaves = len(x.leaves)
        assert len(c) <= (leaves - 1) * math.exp(log_p) * (1 + 1e-9), f"candidate set at {x.leaves} too large"
        cap_log = min(min(math.log(sizes[v]) for v in x.leaves), sum(math.log(sizes[v]) for v in x.leaves) - (leaves - 1) * log_p)
        assert len(d) == 0 or math.log(len(d)) <= cap_log + 1e-9, f"deferred set at {x.leaves} too large"
        stats.node_checks.append({"leaves": list(x.leaves), "C": len(c), "D": len(d)})


# -- triangles ------------------------------------------------------------------


@dataclass
class TriangleStats:
    work: int = 0
    heavy_keys: int = 0
    light_tuples: int = 0
    heavy_candidates: int = 0
    light_candidates: int = 0
    out_size: int = 0

    @property
    def candidates(self) -> int:
        return self.heavy_candidates + self.light_candidates


def _groups(r: Relation, s: Relation, t: Relation) -> tuple[list[str], list[str], list[str]]:
    rs, ss, ts = set(r.schema), set(s.schema), set(t.schema)
    a = [x for x in r.schema if x in ts]
    b = [x for x in r.schema if x in ss]
    c = [x for x in s.schema if x in ts]
    if rs & ss & ts:
        raise SchemaError("triangle relations share an attribute common to all three")
    if not a or not b or not c or rs != set(a) | set(b) or ss != set(b) | set(c) or ts != set(a) | set(c):
        raise SchemaError(f"schemas {r.schema}, {s.schema}, {t.schema} do not form a triangle")
    return a, b, c


def triangle_join(
    r: Relation,
    s: Relation,
    t: Relation,
    tau: float | None = None,
    stats: TriangleStats | None = None,
) -> Relation:
    """Triangle join ``R(A,B) ⋈ S(B,C) ⋈ T(A,C)`` by splitting ``B`` values into heavy and light.

    ``A``, ``B`` and ``C`` may each be a group of attributes.  With the
    default threshold ``tau^2 = |R||T|/|S|`` a ``B`` value is heavy when
    ``|R[b]|^2 |S| > |R||T|``, decided in exact integer arithmetic.
    """
    stats = stats if stats is not None else TriangleStats()
    a, b, c = _groups(r, s, t)
    schema = tuple(a + b + c)
    if not r or not s or not t:
        return Relation(schema, ())
    ra, rb = r.positions(a), r.positions(b)
    sb, sc = s.positions(b), s.positions(c)
    ta, tc = t.positions(a), t.positions(c)
    r_by_b: dict[tuple, list[tuple]] = defaultdict(list)
    for row in r.rows:
        r_by_b[tuple(row[p] for p in rb)].append(tuple(row[p] for p in ra))
    s_by_b: dict[tuple, list[tuple]] = defaultdict(list)
    s_pairs = set()
    for row in s.rows:
        kb, kc = tuple(row[p] for p in sb), tuple(row[p] for p in sc)
        s_by_b[kb].append(kc)
        s_pairs.add((kb, kc))
    t_pairs = {(tuple(row[p] for p in ta), tuple(row[p] for p in tc)) for row in t.rows}
    r_pairs = {(ka, kb) for kb, kas in r_by_b.items() for ka in kas}
    work = len(r) + len(s) + len(t)
    nr, ns, nt = len(r), len(s), len(t)

    if tau is None:
        def heavy(cnt: int) -> bool:
            return cnt * cnt * ns > nr * nt
    else:
        def heavy(cnt: int) -> bool:
            return cnt > tau

    heavy_keys = [kb for kb, kas in r_by_b.items() if heavy(len(kas))]
    heavy_set = set(heavy_keys)
    out = []
    # heavy side: every heavy b against every (a, c) of T
    for kb in heavy_keys:
        for ka, kc in t_pairs:
            stats.heavy_candidates += 1
            if (ka, kb) in r_pairs and (kb, kc) in s_pairs:
                out.append(ka + kb + kc)
    # light side: light R tuples joined with S on b, filtered by T
    for kb, kas in r_by_b.items():
        if kb in heavy_set:
            continue
        stats.light_tuples += len(kas)
        cs = s_by_b.get(kb, ())
        for ka in kas:
            for kc in cs:
                stats.light_candidates += 1
                if (ka, kc) in t_pairs:
                    out.append(ka + kb + kc)
    stats.heavy_keys = len(heavy_keys)
    work += stats.candidates + len(out)
    stats.work = work
    stats.out_size = len(out)
    return Relation(schema, out)


def triangle_query_join(q: JoinQuery, tau: float | None = None, stats: TriangleStats | None = None) -> Relation:
    """Triangle join on a three-relation query, relations taken in input order as R, S, T."""
    if q.m != 3:
        raise SchemaError("the triangle join needs exactly three relations")
    r, s, t = q.relations
    out = triangle_join(r, s, t, tau, stats)
    return out.reorder(q.attributes)
