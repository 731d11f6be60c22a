"""Left-deep pairwise join plans, the baseline the worst-case optimal joins are measured against.

Joins are pipelined: the left input is cut into chunks whose expansion stays
under ``chunk_rows``, and each chunk flows through the remaining joins.  An
intermediate result is never held in full, yet its cardinality is counted
exactly.  Join keys are matched with sorted arrays and ``searchsorted``.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..relation import JoinQuery, Relation

CHUNK_ROWS = 1 << 22


@dataclass
class BaselineStats:
    order: list[int] = field(default_factory=list)
    intermediates: list[int] = field(default_factory=list)
    max_intermediate: int = 0
    out_size: int = 0
    work: int = 0
    wall_ms: float = 0.0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _array(rel: Relation) -> np.ndarray:
    if not rel.rows:
        return np.zeros((0, rel.arity), dtype=np.int64)
    return np.array(rel.sorted_rows(), dtype=np.int64).reshape(len(rel), rel.arity)


class _Stage:
    """One join against a fixed right input, keyed on the shared attributes."""

    def __init__(self, left_schema: Sequence[str], right: Relation):
        self.left_schema = list(left_schema)
        arr = _array(right)
        shared = [a for a in right.schema if a in self.left_schema]
        self.left_key_pos = [self.left_schema.index(a) for a in shared]
        right_key_pos = [right.schema.index(a) for a in shared]
        self.new_pos = [i for i, a in enumerate(right.schema) if a not in self.left_schema]
        self.out_schema = self.left_schema + [right.schema[i] for i in self.new_pos]
        keys, self._combine_steps = self._key_ids(arr, right_key_pos)
        order = np.argsort(keys, kind="stable")
        self.keys = keys[order]
        self.payload = arr[order][:, self.new_pos]

    @staticmethod
    def _key_ids(arr: np.ndarray, key_pos: list[int]):
        """Dense ids of the key columns, built one column at a time so they never overflow."""
        steps = []
        keys = np.zeros(len(arr), dtype=np.int64)
        for p in key_pos:
            uniq = np.unique(arr[:, p])
            ids = np.searchsorted(uniq, arr[:, p]).astype(np.int64)
            combined = keys * len(uniq) + ids
            keys_u, keys = np.unique(combined, return_inverse=True)
            keys = keys.astype(np.int64).reshape(-1)
            steps.append((uniq, keys_u))
        return keys, steps

    def left_keys(self, left: np.ndarray) -> np.ndarray:
        keys = np.zeros(len(left), dtype=np.int64)
        valid = np.ones(len(left), dtype=bool)
        for p, (uniq, keys_u) in zip(self.left_key_pos, self._combine_steps):
            col = left[:, p]
            if len(uniq) == 0:
                return np.full(len(left), -1, dtype=np.int64)
            pos = np.searchsorted(uniq, col)
            pos_c = np.minimum(pos, len(uniq) - 1)
            valid &= uniq[pos_c] == col
            combined = keys * len(uniq) + pos_c
            kpos = np.searchsorted(keys_u, combined)
            kpos_c = np.minimum(kpos, len(keys_u) - 1)
            valid &= keys_u[kpos_c] == combined
            keys = kpos_c.astype(np.int64)
        return np.where(valid, keys, -1)

    def counts(self, left: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        if not self.left_key_pos:
            lo = np.zeros(len(left), dtype=np.int64)
            return lo, np.full(len(left), len(self.keys), dtype=np.int64)
        k = self.left_keys(left)
        lo = np.searchsorted(self.keys, k, side="left")
        hi = np.searchsorted(self.keys, k, side="right")
        cnt = np.where(k >= 0, hi - lo, 0)
        return lo.astype(np.int64), cnt.astype(np.int64)

    @staticmethod
    def expand(left: np.ndarray, payload: np.ndarray, lo: np.ndarray, cnt: np.ndarray) -> np.ndarray:
        total = int(cnt.sum())
        if total == 0:
            return np.zeros((0, left.shape[1] + payload.shape[1]), dtype=np.int64)
        li = np.repeat(np.arange(len(left)), cnt)
        starts = np.cumsum(cnt) - cnt
        ri = lo[li] + (np.arange(total) - starts[li])
        return np.hstack([left[li], payload[ri]])


def binary_join_plan(
    q: JoinQuery,
    order: Sequence[int] | None = None,
    collect: bool = True,
    chunk_rows: int = CHUNK_ROWS,
) -> tuple[Relation | None, BaselineStats]:
    """Left-deep plan joining the relations in ``order``.

    ``intermediates[i]`` is the size of the result after joining the first
    ``i + 2`` relations, for every join but the last.  With ``collect=False``
    the output is only counted.
    """
    t0 = time.perf_counter()
    order = list(range(q.m)) if order is None else [int(i) for i in order]
    if sorted(order) != list(range(q.m)):
        raise ValueError(f"order {order} is not a permutation of the relations")
    stats = BaselineStats(order=order, intermediates=[0] * max(q.m - 2, 0))
    rels = [q.relations[i] for i in order]
    stages = []
    schema = list(rels[0].schema)
    for r in rels[1:]:
        st = _Stage(schema, r)
        stages.append(st)
        schema = st.out_schema
    stats.work = sum(len(r) for r in rels)
    outputs: list[np.ndarray] = []

    def push(level: int, block: np.ndarray) -> None:
        if level == len(stages):
            stats.out_size += len(block)
            if collect:
                outputs.append(block)
            return
        st = stages[level]
        lo, cnt = st.counts(block)
        stats.work += len(block)
        last = level == len(stages) - 1
        if last and not collect:
            stats.out_size += int(cnt.sum())
            return
        cum = np.cumsum(cnt)
        start = 0
        while start < len(block):
            base = cum[start - 1] if start else 0
            stop = int(np.searchsorted(cum, base + chunk_rows, side="right"))
            stop = max(stop, start + 1)
            piece = st.expand(block[start:stop], st.payload, lo[start:stop], cnt[start:stop])
            if not last:
                stats.intermediates[level] += len(piece)
                stats.work += len(piece)
            push(level + 1, piece)
            start = stop

    push(0, _array(rels[0]))
    stats.max_intermediate = max(stats.intermediates, default=0)
    stats.work += stats.out_size
    stats.wall_ms = (time.perf_counter() - t0) * 1000
    if not collect:
        return None, stats
    rows = np.vstack(outputs) if outputs else np.zeros((0, len(schema)), dtype=np.int64)
    out = Relation(schema, map(tuple, rows.tolist())).reorder(q.attributes)
    return out, stats


def best_binary_plan(q: JoinQuery, collect: bool = True) -> tuple[Relation | None, BaselineStats]:
    """Try every left-deep order (``m <= 6``) and keep the one with the smallest maximum intermediate."""
    if q.m > 6:
        raise ValueError("exhaustive plan search is limited to six relations")
    best = None
    for perm in itertools.permutations(range(q.m)):
        res = binary_join_plan(q, perm, collect=False)
        if best is None or res[1].max_intermediate < best[1].max_intermediate:
            best = res
    assert best is not None
    if collect:
        return binary_join_plan(q, best[1].order, collect=True)
    return best


def pairwise_join_size(r: Relation, s: Relation) -> int:
    """``|r ⋈ s|`` counted without materializing it."""
    q = JoinQuery.from_relations([r, s])
    return binary_join_plan(q, collect=False)[1].out_size
