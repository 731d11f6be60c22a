from __future__ import annotations

import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import queries
from wcoj.relation import BudgetExceeded, JoinQuery, Relation, brute_force_join
from wcoj.relaxed import (
    enumerate_cstar,
    qualifying_subsets,
    relaxed_brute_force,
    relaxed_join,
    relaxed_join_with_stats,
    relaxed_pairwise,
    subset_count,
)
from wcoj.workbench.generators import gen_random_instance, gen_relaxed_lb_instance


def test_subset_count():
    assert subset_count(4, 0) == 1
    assert subset_count(4, 1) == 5
    assert subset_count(3, 5) == 8


def test_r0_family_is_whole_edge_set():
    q = gen_random_instance(random.Random(1), 3, 4, 5, 3)
    fam = enumerate_cstar(q, 0)
    assert fam.c_full == [tuple(range(q.m))] and len(fam.c_star) == 1


def test_lower_bound_family_two_classes():
    q = gen_relaxed_lb_instance(2, 5).query
    fam = enumerate_cstar(q, 1)
    assert fam.c_hat == [(0, 1), (0, 2), (1, 2)]
    assert sorted(fam.support[s] for s in fam.c_star) == [(0, 1), (2,)]
    assert fam.c_star == [(0, 1), (0, 2)]


def test_lower_bound_sizes_follow_the_definition():
    for n, N in [(2, 3), (3, 4), (3, 10)]:
        inst = gen_relaxed_lb_instance(n, N)
        for r in range(0, n + 2):
            out = relaxed_join(inst.query, r)
            assert len(out) == inst.expected[f"r{r}"]
            if N <= 4:
                assert out == relaxed_brute_force(inst.query, r)


def test_lower_bound_wide_relation_counts_once_it_qualifies_alone():
    q = gen_relaxed_lb_instance(3, 10).query
    assert len(relaxed_join(q, 3)) == 1010
    assert len(relaxed_join(q, 1)) == 1000


def test_r0_is_the_join():
    rng = random.Random(5)
    for _ in range(20):
        q = gen_random_instance(rng, rng.randint(1, 4), rng.randint(1, 5), 10, 3)
        assert relaxed_join(q, 0) == brute_force_join(q)


def test_every_minimal_support_has_one_representative():
    rng = random.Random(8)
    for _ in range(30):
        q = gen_random_instance(rng, rng.randint(2, 4), rng.randint(2, 6), 8, 3)
        fam = enumerate_cstar(q, 1)
        reps = [fam.support[s] for s in fam.c_star]
        assert len(reps) == len(set(reps))
        assert set(reps) == {fam.support[s] for s in fam.c_hat}
        for s in fam.c_star:
            assert s == min(t for t in fam.c_hat if fam.support[t] == fam.support[s])


def test_budget_is_enforced():
    q = JoinQuery.from_relations([Relation((f"a{i}",), [(1,)]) for i in range(12)])
    with pytest.raises(BudgetExceeded):
        qualifying_subsets(q, 6, budget=100)
    with pytest.raises(ValueError):
        qualifying_subsets(q, 13)


def test_stats_report_each_join():
    q = gen_relaxed_lb_instance(2, 3).query
    out, st = relaxed_join_with_stats(q, 1)
    assert st.out_size == len(out) == 9
    assert len(st.joins) == 2


@settings(max_examples=150, deadline=None)
@given(queries(max_n=4, max_m=6, max_rows=8, domain=3), st.integers(0, 2))
def test_matches_definition(q, r):
    r = min(r, q.m)
    truth = relaxed_brute_force(q, r)
    assert relaxed_join(q, r) == truth
    assert relaxed_pairwise(q, r) == truth


@settings(max_examples=60, deadline=None)
@given(queries(max_n=4, max_m=5, max_rows=8, domain=3))
def test_monotone_in_r(q):
    prev = set()
    for r in range(0, q.m + 1):
        cur = relaxed_join(q, r).rows
        assert prev <= cur
        prev = cur
