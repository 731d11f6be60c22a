"""Sorted-array tries over relations, keyed in a fixed attribute order.

Level ``j`` of a trie holds the distinct values of attribute ``a_j`` for
every distinct prefix ``(a_0..a_{j-1})``, stored as one flat sorted-run
array plus an offsets array pointing at the children run of each node
(compressed sparse rows).  A node range ``(level, lo, hi)`` therefore names
the set of children of one prefix, and counting the distinct extensions of
a prefix down to any deeper level is a matter of chasing offsets.
"""
from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from typing import Iterator, Sequence

from .relation import Relation, SchemaError


@dataclass
class WorkCounter:
    """Machine-independent cost accounting.

    ``steps`` counts binary searches, offset chases and tuples touched;
    it is the unit used by every runtime bound in the test-suite.
    """

    steps: int = 0

    def add(self, k: int = 1) -> None:
        self.steps += k


@dataclass(frozen=True)
class NodeRange:
    """Children of one prefix: entries ``lo..hi-1`` of ``values[level]``."""

    level: int
    lo: int
    hi: int

    @property
    def size(self) -> int:
        return self.hi - self.lo


class TrieIndex:
    """Trie over a relation whose levels follow ``attr_order``."""

    def __init__(self, relation: Relation, attr_order: Sequence[str]):
        attr_order = tuple(attr_order)
        if set(attr_order) != set(relation.schema) or len(attr_order) != relation.arity:
            raise SchemaError(f"trie order {attr_order} is not a permutation of {relation.schema}")
        self.relation = relation
        self.attr_order = attr_order
        self.arity = len(attr_order)
        pos = relation.positions(attr_order)
        rows = sorted(tuple(r[p] for p in pos) for r in relation.rows)
        self.size = len(rows)
        values: list[list[int]] = [[] for _ in range(self.arity)]
        offsets: list[list[int]] = [[] for _ in range(self.arity - 1)]
        prev: tuple | None = None
        for row in rows:
            # first level where this row departs from the previous one
            d = 0
            if prev is not None:
                while row[d] == prev[d]:
                    d += 1
            for j in range(d, self.arity):
                if j < self.arity - 1:
                    offsets[j].append(len(values[j + 1]))
                values[j].append(row[j])
            prev = row
        for j in range(self.arity - 1):
            offsets[j].append(len(values[j + 1]))
        self.values = values
        self.offsets = offsets

    def __repr__(self) -> str:
        return f"TrieIndex({', '.join(self.attr_order)}; {self.size} rows)"

    # -- navigation ---------------------------------------------------------

    def root(self) -> NodeRange:
        return NodeRange(0, 0, len(self.values[0]) if self.arity else 0)

    def step(self, node: NodeRange, value: int, counter: WorkCounter | None = None) -> NodeRange | None:
        """Descend from ``node`` along ``value``; None when absent."""
        if counter is not None:
            counter.steps += 1
        vals = self.values[node.level]
        i = bisect_left(vals, value, node.lo, node.hi)
        if i == node.hi or vals[i] != value:
            return None
        level = node.level + 1
        if level == self.arity:
            return NodeRange(level, 0, 0)
        off = self.offsets[node.level]
        return NodeRange(level, off[i], off[i + 1])

    def descend(self, node: NodeRange | None, prefix: Sequence[int], counter: WorkCounter | None = None) -> NodeRange | None:
        for v in prefix:
            if node is None:
                return None
            node = self.step(node, v, counter)
        return node

    def locate(self, prefix: Sequence[int], counter: WorkCounter | None = None) -> NodeRange | None:
        """Node range below ``prefix`` (given in trie order) or None if absent."""
        if len(prefix) > self.arity:
            raise SchemaError(f"prefix of length {len(prefix)} exceeds trie depth {self.arity}")
        if self.size == 0:
            return None
        return self.descend(self.root(), prefix, counter)

    def count(self, node: NodeRange | None, depth: int, counter: WorkCounter | None = None) -> int:
        """Number of distinct length-``depth`` extensions below ``node``."""
        if node is None:
            return 0
        if depth == 0:
            return 1
        if node.level + depth > self.arity:
            raise SchemaError("count depth runs past the last trie level")
        lo, hi = node.lo, node.hi
        for j in range(node.level, node.level + depth - 1):
            if lo == hi:
                return 0
            off = self.offsets[j]
            lo, hi = off[lo], off[hi]
            if counter is not None:
                counter.steps += 1
        return hi - lo

    def enumerate(self, node: NodeRange | None, depth: int, counter: WorkCounter | None = None) -> Iterator[tuple[int, ...]]:
        """Distinct length-``depth`` extensions below ``node`` in lexicographic order."""
        if node is None:
            return
        if depth == 0:
            yield ()
            return
        if node.level + depth > self.arity:
            raise SchemaError("enumerate depth runs past the last trie level")
        last = node.level + depth - 1
        values = self.values
        offsets = self.offsets

        def walk(level: int, lo: int, hi: int, acc: tuple) -> Iterator[tuple]:
            vals = values[level]
            if level == last:
                if counter is not None:
                    counter.steps += hi - lo
                for i in range(lo, hi):
                    yield acc + (vals[i],)
                return
            off = offsets[level]
            for i in range(lo, hi):
                yield from walk(level + 1, off[i], off[i + 1], acc + (vals[i],))

        yield from walk(node.level, node.lo, node.hi, ())

    def values_at(self, node: NodeRange) -> list[int]:
        """The sorted child values of ``node`` (a one-level enumeration)."""
        return self.values[node.level][node.lo:node.hi]

    # -- the three contracts, stated over attribute prefixes -----------------

    def prefix_contains(self, prefix: Sequence[int], counter: WorkCounter | None = None) -> bool:
        if len(prefix) == 0:
            return self.size > 0
        return self.locate(prefix, counter) is not None

    def section_count(self, prefix: Sequence[int], j: int | None = None, counter: WorkCounter | None = None) -> int:
        """``|pi_{a_{i+1}..a_j}(R[prefix])|`` with ``i = len(prefix)``; ``j`` defaults to the arity."""
        j = self.arity if j is None else j
        i = len(prefix)
        if not i <= j <= self.arity:
            raise SchemaError(f"need len(prefix) <= j <= arity, got i={i}, j={j}")
        return self.count(self.locate(prefix, counter), j - i, counter)

    def section_enumerate(self, prefix: Sequence[int], j: int | None = None, counter: WorkCounter | None = None) -> Iterator[tuple[int, ...]]:
        j = self.arity if j is None else j
        i = len(prefix)
        if not i <= j <= self.arity:
            raise SchemaError(f"need len(prefix) <= j <= arity, got i={i}, j={j}")
        yield from self.enumerate(self.locate(prefix, counter), j - i, counter)


def build_index(relation: Relation, order: Sequence[str]) -> TrieIndex:
    """Trie for ``relation`` with attributes sorted by their position in ``order``."""
    rank = {a: i for i, a in enumerate(order)}
    missing = [a for a in relation.schema if a not in rank]
    if missing:
        raise SchemaError(f"attributes {missing} are absent from the total order")
    return TrieIndex(relation, sorted(relation.schema, key=rank.__getitem__))
