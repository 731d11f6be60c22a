from __future__ import annotations

import math
import random

import pytest

from conftest import triangle_trap
from wcoj.lw import LwStats, NotLoomisWhitney, TriangleStats, ceil_ratio, lw_join, triangle_join, triangle_query_join
from wcoj.relation import JoinQuery, Relation, brute_force_join
from wcoj.workbench.generators import gen_lw_bad_instance


def random_lw(rng: random.Random, n: int, size: int, domain: int) -> JoinQuery:
    attrs = [f"v{i}" for i in range(n)]
    size = min(size, (domain + 1) ** (n - 1))
    rels = []
    for i in range(n):
        schema = attrs[:i] + attrs[i + 1:]
        rows = set()
        while len(rows) < size:
            rows.add(tuple(rng.randint(0, domain) for _ in schema))
        rels.append(Relation(schema, rows, f"R{i}"))
    return JoinQuery.from_relations(rels, attrs)


def test_ceil_ratio_exact():
    assert ceil_ratio([4, 4, 4], 3, 1) == 8
    assert ceil_ratio([5, 5, 5], 3, 2) == math.ceil(5**1.5 / 2)
    assert ceil_ratio([10, 10], 2, 3) == 34


def test_triangle_trap_is_empty():
    assert len(lw_join(triangle_trap(4), check=True)) == 0


def test_n2_is_cross_product():
    q = JoinQuery.from_relations([Relation("B", [(1,), (2,), (3,)]), Relation("A", [(1,), (2,)])], "AB")
    out = lw_join(q, check=True)
    assert len(out) == 6 and out == brute_force_join(q)


def test_bad_instance_size():
    assert len(lw_join(gen_lw_bad_instance(3, 5).query)) == 7
    assert len(lw_join(gen_lw_bad_instance(4, 4).query)) == 5


@pytest.mark.parametrize("n", [3, 4, 5])
def test_random_matches_oracle(n):
    rng = random.Random(n)
    for _ in range(15):
        q = random_lw(rng, n, rng.randint(1, 30), 3)
        st = LwStats()
        assert lw_join(q, check=True, stats=st) == brute_force_join(q)
        assert st.out_size == len(brute_force_join(q))


def test_relations_may_come_in_any_order():
    rng = random.Random(2)
    q = random_lw(rng, 4, 20, 2)
    shuffled = JoinQuery.from_relations(list(reversed(q.relations)), q.attributes)
    assert lw_join(shuffled) == brute_force_join(q)


def test_rejects_non_lw_query():
    with pytest.raises(NotLoomisWhitney):
        lw_join(JoinQuery.from_relations([Relation("AB", [(1, 2)]), Relation("BC", [(2, 3)])]))


def test_work_within_bound_on_random_data():
    rng = random.Random(9)
    for n in (3, 4):
        q = random_lw(rng, n, 60, 8)
        st = LwStats()
        lw_join(q, stats=st)
        sizes = q.sizes
        bound = 64 * n * n * math.prod(sizes) ** (1 / (n - 1)) + 64 * n * n * sum(sizes)
        assert st.work <= bound


# -- triangles ------------------------------------------------------------------


def test_triangle_trap_heavy_keys_bounded():
    st = TriangleStats()
    q = triangle_trap(4)
    assert len(triangle_query_join(q, tau=2, stats=st)) == 0
    assert st.heavy_keys <= 4 / 2


def test_triangle_singletons():
    out = triangle_join(Relation("AB", [(1, 2)]), Relation("BC", [(2, 3)]), Relation("AC", [(1, 3)]))
    assert out.rows == {(1, 2, 3)}


def test_triangle_random_n50():
    rng = random.Random(50)
    for _ in range(10):
        rels = [Relation(s, {(rng.randint(0, 9), rng.randint(0, 9)) for _ in range(50)}) for s in ("AB", "BC", "AC")]
        q = JoinQuery.from_relations(rels)
        st = TriangleStats()
        out = triangle_query_join(q, stats=st)
        assert out == brute_force_join(q)
        nr, ns, nt = q.sizes
        assert st.candidates <= 4 * math.sqrt(nr * ns * nt) + nr + ns + nt


def test_triangle_attribute_groups():
    r = Relation(["A1", "A2", "B"], [(1, 1, 2), (0, 0, 0)])
    s = Relation(["B", "C"], [(2, 5), (0, 0)])
    t = Relation(["A1", "A2", "C"], [(1, 1, 5)])
    q = JoinQuery.from_relations([r, s, t])
    assert triangle_join(r, s, t).reorder(q.attributes) == brute_force_join(q)


def test_triangle_rejects_non_triangle():
    with pytest.raises(ValueError):
        triangle_join(Relation("AB", []), Relation("BC", []), Relation("CD", []))
