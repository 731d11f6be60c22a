from __future__ import annotations

import math
import random

import pytest
from hypothesis import given, settings

from conftest import triangle_trap, queries
from wcoj.cover import graph_cover_decompose
from wcoj.graph import GraphStats, collapse_parallel, cycle_join, graph_join
from wcoj.lw import lw_join
from wcoj.relation import JoinQuery, Relation, SchemaError, brute_force_join
from wcoj.workbench.generators import gen_random_instance


def rand_rel(rng: random.Random, schema, size: int, domain: int) -> Relation:
    size = min(size, (domain + 1) ** len(schema))
    rows = set()
    while len(rows) < size:
        rows.add(tuple(rng.randint(0, domain) for _ in schema))
    return Relation(schema, rows, "".join(schema))


def cycle(rng, length: int, sizes, domain: int) -> JoinQuery:
    verts = [f"v{i}" for i in range(length)]
    rels = [rand_rel(rng, (verts[i], verts[(i + 1) % length]), s, domain) for i, s in enumerate(sizes)]
    return JoinQuery.from_relations(rels, verts)


def test_triangle_delegates_to_lw():
    q = triangle_trap(16)
    assert graph_join(q) == lw_join(q) == brute_force_join(q)
    rng = random.Random(1)
    q = cycle(rng, 3, [30, 30, 30], 6)
    st = GraphStats()
    assert graph_join(q, st) == lw_join(q)
    assert st.cycles[0]["kind"] == "triangle"


def test_four_cycle_uses_small_pair():
    rng = random.Random(4)
    q = cycle(rng, 4, [2, 100, 2, 100], 12)
    st = GraphStats()
    assert graph_join(q, st) == brute_force_join(q)
    # the optimal cover is the two small edges at weight 1; their product is the only expansion
    assert graph_cover_decompose(q).stars == [[0], [2]]
    assert st.work <= 4 + 2 * 4 + 4
    cst = GraphStats()
    assert cycle_join(list(q.relations), cst) == brute_force_join(q)
    assert cst.cycles[0] == {"length": 4, "kind": "even", "product": 4}


@pytest.mark.parametrize("seed", range(5))
def test_five_cycle(seed):
    rng = random.Random(seed)
    q = cycle(rng, 5, [20] * 5, 4)
    st = GraphStats()
    assert graph_join(q, st) == brute_force_join(q)
    assert st.cycles[0]["kind"] == "odd"


def test_seven_cycle_skewed_sizes():
    rng = random.Random(7)
    q = cycle(rng, 7, [3, 40, 5, 40, 2, 30, 25], 6)
    assert graph_join(q) == brute_force_join(q)


def test_star_query():
    rng = random.Random(2)
    q = JoinQuery.from_relations([rand_rel(rng, "AB", 20, 5), rand_rel(rng, "AC", 20, 5)])
    assert graph_join(q) == brute_force_join(q)


def test_triangle_with_pendant():
    rng = random.Random(3)
    rels = [rand_rel(rng, s, 25, 5) for s in ("AB", "BC", "AC", "CD")]
    q = JoinQuery.from_relations(rels)
    assert graph_join(q) == brute_force_join(q)


def test_triangle_trap_large_is_linear():
    works = []
    for N in (500, 2000):
        st = GraphStats()
        assert len(graph_join(triangle_trap(N), st)) == 0
        works.append(st.work)
    assert math.log(works[1] / works[0]) / math.log(4) <= 1.25


def test_parallel_edges_are_intersected():
    q = JoinQuery.from_relations([Relation("AB", [(1, 2), (3, 4)]), Relation("BA", [(2, 1)])])
    assert collapse_parallel(q).m == 1
    assert graph_join(q).rows == {(1, 2)}


def test_unary_edges_and_empty_relations():
    q = JoinQuery.from_relations([Relation("A", [(1,), (2,)]), Relation("AB", [(1, 5), (3, 5)]), Relation("C", [(0,)])])
    assert graph_join(q) == brute_force_join(q)
    empty = JoinQuery.from_relations([Relation("A", []), Relation("AB", [(1, 2)])])
    assert len(graph_join(empty)) == 0


def test_cycle_join_validation():
    with pytest.raises(SchemaError):
        cycle_join([Relation("AB", []), Relation("BC", [])])
    with pytest.raises(SchemaError):
        graph_join(JoinQuery.from_relations([Relation("ABC", [(1, 2, 3)])]))


@settings(max_examples=200, deadline=None)
@given(queries(max_n=6, max_m=7, max_rows=12, domain=3, max_arity=2))
def test_random_graphs_match_oracle(q):
    assert graph_join(q) == brute_force_join(q)


def test_random_graph_sweep():
    rng = random.Random(99)
    for _ in range(50):
        q = gen_random_instance(rng, rng.randint(3, 7), rng.randint(3, 8), 25, 5, max_arity=2)
        assert graph_join(q) == brute_force_join(q)
