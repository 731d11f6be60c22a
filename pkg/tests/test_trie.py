from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from conftest import triangle_trap
from wcoj.relation import Relation, SchemaError, section
from wcoj.trie import TrieIndex, WorkCounter, build_index


@pytest.fixture
def r_trie() -> TrieIndex:
    return TrieIndex(triangle_trap(4).relations[0], ("A", "B"))


def test_triangle_trap_structure(r_trie):
    root = r_trie.root()
    assert r_trie.values_at(root) == [0, 1, 2]
    child = r_trie.step(root, 0)
    assert r_trie.values_at(child) == [1, 2]


def test_prefix_contains(r_trie):
    assert r_trie.prefix_contains((0,))
    assert not r_trie.prefix_contains((3,))
    assert r_trie.prefix_contains(())
    assert not TrieIndex(Relation("AB", []), "AB").prefix_contains(())


def test_section_count(r_trie):
    assert r_trie.section_count((0,), 2) == 2
    assert r_trie.section_count((), 2) == 4
    assert r_trie.section_count((3,), 2) == 0
    assert r_trie.section_count((), 1) == 3


def test_section_enumerate(r_trie):
    assert list(r_trie.section_enumerate((0,), 2)) == [(1,), (2,)]
    assert list(r_trie.section_enumerate(())) == r_trie.relation.sorted_rows()
    assert list(r_trie.section_enumerate((9,))) == []


def test_empty_relation_trie():
    t = TrieIndex(Relation("AB", []), ("A", "B"))
    assert t.size == 0 and list(t.section_enumerate(())) == []


def test_bad_order_rejected():
    with pytest.raises(SchemaError):
        TrieIndex(Relation("AB", [(1, 2)]), ("A", "C"))
    with pytest.raises(SchemaError):
        TrieIndex(Relation("AB", [(1, 2)]), ("A", "B")).section_count((1, 2, 3))


def test_build_index_follows_global_order():
    t = build_index(Relation("AB", [(1, 2)]), ["B", "C", "A"])
    assert t.attr_order == ("B", "A")


def test_prefix_lookup_cost_is_logarithmic():
    rows = [(i, j) for i in range(256) for j in range(4)]
    t = TrieIndex(Relation("AB", rows), "AB")
    c = WorkCounter()
    assert t.prefix_contains((200, 3), c)
    assert c.steps <= 2 * (8 + 2) + 4


def test_enumeration_cost_is_linear():
    rows = [(i, j) for i in range(50) for j in range(10)]
    t = TrieIndex(Relation("AB", rows), "AB")
    c = WorkCounter()
    assert len(list(t.section_enumerate((), counter=c))) == 500
    assert c.steps <= 4 * 500


rows3 = st.lists(st.tuples(*(st.integers(0, 4),) * 3), max_size=30)


@settings(max_examples=150, deadline=None)
@given(rows3, st.permutations("ABC"), st.lists(st.integers(0, 4), max_size=3))
def test_trie_matches_relation_operators(rows, order, prefix):
    rel = Relation("ABC", rows)
    t = TrieIndex(rel, order)
    assert list(t.section_enumerate(())) == sorted(rel.reorder(order).rows)
    sec = section(rel, dict(zip(order, prefix))).reorder(order[len(prefix):])
    assert t.prefix_contains(prefix) == (len(sec) > 0 or len(prefix) == 0 and len(rel) > 0)
    for j in range(len(prefix), 4):
        expected = {row[: j - len(prefix)] for row in sec.rows}
        assert t.section_count(prefix, j) == len(expected)
        assert list(t.section_enumerate(prefix, j)) == sorted(expected)
