from __future__ import annotations

import random

import pytest

from conftest import triangle_trap, six_attribute_query
from wcoj.plan import build_qp_tree, check_total_order, plan_report, resolve_edge_order, total_order
from wcoj.relation import JoinQuery, Relation
from wcoj.workbench.generators import gen_random_instance


def names(q, ids):
    return {q.attributes[a] for a in ids}


def test_six_attribute_tree_and_order():
    q = six_attribute_query()
    tree = build_qp_tree(q, [0, 1, 2, 3, 4])
    root = tree.root
    assert q.edge_name(root.edge) == "e" and root.label == 5
    assert names(q, root.lc.universe) == {"1", "2", "4"}
    assert names(q, root.rc.universe) == {"3", "5", "6"}
    to = total_order(tree)
    assert [q.attributes[a] for a in to.order] == ["1", "4", "2", "5", "3", "6"]
    assert check_total_order(tree, to, q.edges) == []


def test_single_edge_is_a_leaf():
    q = JoinQuery.from_relations([Relation("BA", [(1, 2)])], "AB")
    tree = build_qp_tree(q)
    assert tree.root.is_leaf and total_order(tree).order == (0, 1)


def test_triangle_tree():
    q = triangle_trap(4)
    tree = build_qp_tree(q, [0, 1, 2])
    root = tree.root
    assert root.label == 3 and names(q, q.edges[root.edge]) == {"A", "C"}
    assert names(q, root.lc.universe) == {"B"}
    assert names(q, root.rc.universe) == {"A", "C"}
    to = total_order(tree)
    assert [q.attributes[a] for a in to.order] in (["B", "A", "C"], ["B", "C", "A"])
    assert check_total_order(tree, to, q.edges) == []


def test_edge_order_validation():
    q = triangle_trap(4)
    with pytest.raises(ValueError):
        resolve_edge_order(q, [0, 0, 1])
    assert sorted(resolve_edge_order(q, seed=5)) == [0, 1, 2]
    assert resolve_edge_order(q, seed=5) == resolve_edge_order(q, seed=5)


def test_check_total_order_detects_bad_order():
    q = six_attribute_query()
    tree = build_qp_tree(q, [0, 1, 2, 3, 4])
    bad = type(total_order(tree))((0, 1, 2, 3, 4, 5))
    assert check_total_order(tree, bad, q.edges)


def test_plan_report_fields():
    rep = plan_report(six_attribute_query())
    assert rep["total_order"] == ["1", "4", "2", "5", "3", "6"]
    assert rep["violations"] == [] and "k=5" in rep["ascii"]


def test_random_hypergraphs_satisfy_order_properties():
    rng = random.Random(3)
    for _ in range(300):
        q = gen_random_instance(rng, rng.randint(1, 8), rng.randint(1, 8), 1, 1)
        order = list(range(q.m))
        rng.shuffle(order)
        tree = build_qp_tree(q, order)
        assert check_total_order(tree, total_order(tree), q.edges) == []
