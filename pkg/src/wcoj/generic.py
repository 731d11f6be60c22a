"""Worst-case optimal join for arbitrary hypergraphs.

The driver builds the plan tree, derives the total attribute order, indexes
every relation as a trie in that order and then evaluates the root call of
a recursive join.  Each call joins the sections of the first ``k`` edges
inside its universe; an internal node first solves its left part and then,
per left tuple, either recurses into the right part (when the estimated
size of that sub-join is below the anchor relation's section) or scans the
anchor section and probes the other relations.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .cover import CoverSolution, as_cover, is_feasible, solve_cover_lp
from .plan import PlanNode, QpTree, TotalOrder, build_qp_tree, total_order
from .relation import JoinQuery, Relation
from .trie import TrieIndex, WorkCounter, build_index

GUARD = 1e-12
BOUND_SLACK = 1e-9


@dataclass
class JoinStats:
    work: int = 0
    out_size: int = 0
    log_bound: float = 0.0
    calls: int = 0
    leaf_calls: int = 0
    case_a: int = 0
    case_b: int = 0
    bound_checks: int = 0
    bound_violations: list[dict] = field(default_factory=list)
    wall_ms: float = 0.0
    total_order: list[str] = field(default_factory=list)
    edge_order: list[int] = field(default_factory=list)
    trace: list[dict] | None = None

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k != "trace"}
        if self.trace is not None:
            d["trace"] = self.trace
        return d


@dataclass
class _NodeInfo:
    s: int  # number of attributes preceding the universe
    u: int  # universe size
    w: int = 0  # size of the part outside the anchor edge
    # leaf: (edge, prefix positions, depth) for each of the first k edges
    leaf_edges: list[tuple[int, tuple[int, ...], int]] = field(default_factory=list)
    # internal: anchor prefix positions and the anchor's depth into the right part
    anchor_prefix: tuple[int, ...] = ()
    # internal: other edges meeting the right part: (label index, edge, prefix positions, depth, offsets in right block)
    probes: list[tuple[int, int, tuple[int, ...], int, tuple[int, ...]]] = field(default_factory=list)
    # every edge among the first k meeting the universe: (label index, edge, prefix positions in S, depth in U)
    bound_terms: list[tuple[int, int, tuple[int, ...], int]] = field(default_factory=list)


class JoinEngine:
    """Prepared plan, order and tries for one query; ``run`` evaluates it."""

    def __init__(self, q: JoinQuery, edge_order: Sequence[int] | None = None):
        self.q = q
        self.tree: QpTree = build_qp_tree(q, edge_order)
        self.order: TotalOrder = total_order(self.tree)
        self.pos = self.order.positions
        names = [q.attributes[a] for a in self.order.order]
        self.tries: list[TrieIndex] = [build_index(r, names) for r in q.relations]
        self.edge_pos = [tuple(sorted(self.pos[a] for a in e)) for e in q.edges]
        self.info: dict[int, _NodeInfo] = {}
        for node in self.tree.nodes():
            self.info[id(node)] = self._prepare(node)

    def _prepare(self, node: PlanNode) -> _NodeInfo:
        s = min(self.pos[a] for a in node.universe)
        u = len(node.universe)
        info = _NodeInfo(s, u)
        order = self.tree.edge_order
        k = node.label
        for li in range(k):
            e = order[li]
            ps = self.edge_pos[e]
            pre = tuple(p for p in ps if p < s)
            depth = sum(1 for p in ps if s <= p < s + u)
            if depth:
                info.bound_terms.append((li, e, pre, depth))
        if node.is_leaf:
            for li in range(k):
                e = order[li]
                ps = self.edge_pos[e]
                info.leaf_edges.append((e, tuple(p for p in ps if p < s), sum(1 for p in ps if s <= p < s + u)))
            return info
        anchor = node.anchor
        w = len(node.universe - anchor)
        info.w = w
        ek = order[k - 1]
        info.anchor_prefix = tuple(p for p in self.edge_pos[ek] if p < s)
        lo, hi = s + w, s + u
        for li in range(k - 1):
            e = order[li]
            ps = self.edge_pos[e]
            inside = tuple(p - lo for p in ps if lo <= p < hi)
            if inside:
                info.probes.append((li, e, tuple(p for p in ps if p < lo), len(inside), inside))
        return info

    def run(
        self,
        cover: CoverSolution,
        check: bool = False,
        trace: bool = False,
        check_bounds: bool = False,
    ) -> tuple[Relation, JoinStats]:
        q = self.q
        start = time.perf_counter()
        stats = JoinStats(log_bound=cover.objective, edge_order=list(self.tree.edge_order))
        stats.total_order = [q.attributes[a] for a in self.order.order]
        if trace:
            stats.trace = []
        run = _Run(self, stats, check, trace, check_bounds)
        y0 = tuple(Fraction(cover.x[e]) for e in self.tree.edge_order)
        rows = run.call(self.tree.root, y0, ())
        run.counter.steps += len(rows)
        if check:
            assert rows == sorted(set(rows)), "root output is not sorted and duplicate-free"
        names = tuple(q.attributes[a] for a in self.order.order)
        out = Relation(names, rows).reorder(q.attributes)
        stats.work = run.counter.steps
        stats.out_size = len(out)
        stats.wall_ms = (time.perf_counter() - start) * 1000
        return out, stats


class _Run:
    def __init__(self, engine: JoinEngine, stats: JoinStats, check: bool, trace: bool, check_bounds: bool):
        self.e = engine
        self.stats = stats
        self.check = check
        self.trace = trace
        self.check_bounds = check_bounds or check
        self.counter = WorkCounter()
        self._floats: dict[tuple, tuple[float, ...]] = {}
        self._rescaled: dict[tuple, tuple[Fraction, ...]] = {}

    def floats(self, y: tuple[Fraction, ...]) -> tuple[float, ...]:
        f = self._floats.get(y)
        if f is None:
            f = self._floats[y] = tuple(float(v) for v in y)
        return f

    def rescale(self, y: tuple[Fraction, ...]) -> tuple[Fraction, ...]:
        r = self._rescaled.get(y)
        if r is None:
            denom = 1 - y[-1]
            r = self._rescaled[y] = tuple(v / denom for v in y[:-1])
        return r

    def _name(self, node: PlanNode) -> str:
        return self.e.q.edge_name(node.edge)

    def _decode(self, t: Sequence[int]) -> list:
        d = self.e.q.dictionary
        return [d.decode(v) for v in t] if d is not None else list(t)

    def _over(self, k: int) -> list[str]:
        return [self.e.q.attributes[a] for a in self.e.order.order[:k]]

    def _check_cover(self, node: PlanNode, y: tuple[Fraction, ...]) -> None:
        order = self.e.tree.edge_order
        edges = [self.e.q.edges[order[i]] & node.universe for i in range(node.label)]
        ids = {a: i for i, a in enumerate(sorted(node.universe))}
        local = [frozenset(ids[a] for a in e) for e in edges]
        assert is_feasible(local, len(ids), y), f"weights {y} do not cover universe {sorted(node.universe)}"

    def call(self, node: PlanNode, y: tuple[Fraction, ...], t: tuple[int, ...]) -> list[tuple[int, ...]]:
        self.stats.calls += 1
        if self.check:
            self._check_cover(node, y)
        info = self.e.info[id(node)]
        if node.is_leaf:
            ret = self._leaf(node, info, t)
        else:
            ret = self._internal(node, info, y, t)
        if self.check:
            assert ret == sorted(set(ret)), f"output of label {node.label} is not sorted and duplicate-free"
        if self.check_bounds:
            self._bound(node, info, y, t, len(ret))
        return ret

    def _bound(self, node: PlanNode, info: _NodeInfo, y, t, size: int) -> None:
        tries = self.e.tries
        log_b = 0.0
        yf = self.floats(y)
        for li, e, pre, depth in info.bound_terms:
            if yf[li] == 0:
                continue
            c = tries[e].count(tries[e].locate(tuple(t[p] for p in pre)), depth)
            if c == 0:
                log_b = -math.inf
                break
            log_b += yf[li] * math.log(c)
        self.stats.bound_checks += 1
        if size and math.log(size) > log_b + math.log1p(BOUND_SLACK):
            self.stats.bound_violations.append(
                {"label": node.label, "universe": sorted(node.universe), "prefix": list(t), "size": size, "log_bound": log_b}
            )

    def _leaf(self, node: PlanNode, info: _NodeInfo, t: tuple[int, ...]) -> list[tuple[int, ...]]:
        self.stats.leaf_calls += 1
        tries = self.e.tries
        counter = self.counter
        located = []
        for e, pre, depth in info.leaf_edges:
            r = tries[e].locate(tuple(t[p] for p in pre), counter)
            located.append((tries[e].count(r, depth, counter), e, r))
        j = min(range(len(located)), key=lambda i: (located[i][0], i))
        _, ej, rj = located[j]
        others = [(tries[e], r) for i, (_, e, r) in enumerate(located) if i != j]
        ret: list[tuple[int, ...]] = []
        if rj is not None and all(r is not None for _, r in others):
            for tu in tries[ej].enumerate(rj, info.u, counter):
                if all(tr.descend(r, tu, counter) is not None for tr, r in others):
                    ret.append(t + tu)
        counter.steps += len(ret)
        if self.trace:
            self.stats.trace.append(
                {
                    "event": "leaf",
                    "label": node.label,
                    "universe": [self.e.q.attributes[a] for a in sorted(node.universe)],
                    "prefix": self._decode(t),
                    "over": self._over(len(t)),
                    "sizes": {self.e.q.edge_name(e): c for c, e, _ in located},
                    "scan": self.e.q.edge_name(ej),
                    "out": len(ret),
                }
            )
        return ret

    def _internal(self, node: PlanNode, info: _NodeInfo, y: tuple[Fraction, ...], t: tuple[int, ...]) -> list[tuple[int, ...]]:
        tries = self.e.tries
        counter = self.counter
        k = node.label
        if node.lc is None:
            left = [t]
        else:
            left = self.call(node.lc, y[: k - 1], t)
        counter.steps += len(left)
        wm = info.u - info.w
        if wm == 0:
            return left
        ek = node.edge
        anchor = tries[ek]
        r_anchor = anchor.locate(tuple(t[p] for p in info.anchor_prefix), counter)
        m_size = anchor.count(r_anchor, wm, counter)
        yk = y[-1]
        can_recurse = yk < 1 and node.rc is not None
        if can_recurse:
            y_rc = self.rescale(y)
            yf = self.floats(y_rc)
            log_m = math.log(m_size) if m_size else -math.inf
            threshold = log_m - GUARD * max(1.0, abs(log_m)) if m_size else -math.inf
        cut = info.s + info.w
        ret: list[tuple[int, ...]] = []
        for tl in left:
            probes = []
            for li, e, pre, depth, offs in info.probes:
                probes.append((li, tries[e], tries[e].locate(tuple(tl[p] for p in pre), counter), depth, offs))
            use_a = False
            lhs = None
            if can_recurse:
                lhs = 0.0
                for li, tr, r, depth, _ in probes:
                    if yf[li] == 0:
                        continue
                    c = tr.count(r, depth, counter)
                    if c == 0:
                        lhs = -math.inf
                        break
                    lhs += yf[li] * math.log(c)
                use_a = m_size > 0 and lhs < threshold
            before = len(ret)
            z_size = None
            if use_a:
                self.stats.case_a += 1
                z = self.call(node.rc, y_rc, tl)
                z_size = len(z)
                counter.steps += z_size
                for row in z:
                    if anchor.descend(r_anchor, row[cut:], counter) is not None:
                        ret.append(row)
            else:
                self.stats.case_b += 1
                if r_anchor is not None and all(r is not None for _, _, r, _, _ in probes):
                    for tw in anchor.enumerate(r_anchor, wm, counter):
                        ok = True
                        for _, tr, r, _, offs in probes:
                            if tr.descend(r, tuple(tw[o] for o in offs), counter) is None:
                                ok = False
                                break
                        if ok:
                            ret.append(tl + tw)
            counter.steps += len(ret) - before
            if self.trace:
                ev = {
                    "event": "split",
                    "label": node.label,
                    "anchor": self._name(node),
                    "universe": [self.e.q.attributes[a] for a in sorted(node.universe)],
                    "tuple": self._decode(tl),
                    "over": self._over(len(tl)),
                    "case": "a" if use_a else "b",
                    "estimate": None if lhs is None else (None if lhs == -math.inf else round(math.exp(lhs), 9)),
                    "anchor_size": m_size,
                    "out": len(ret) - before,
                }
                if z_size is not None:
                    ev["Z"] = z_size
                self.stats.trace.append(ev)
        return ret


def join_with_stats(
    q: JoinQuery,
    cover: CoverSolution | Sequence | None = None,
    edge_order: Sequence[int] | None = None,
    check: bool = False,
    trace: bool = False,
    check_bounds: bool = False,
) -> tuple[Relation, JoinStats]:
    """Evaluate ``q``; ``cover`` defaults to the optimal fractional edge cover."""
    if q.has_empty_relation():
        stats = JoinStats(work=q.m, out_size=0, log_bound=-math.inf, trace=[] if trace else None)
        return q.empty_output(), stats
    if cover is None:
        cover = solve_cover_lp(q)
    elif not isinstance(cover, CoverSolution):
        cover = as_cover(q, cover)
    engine = JoinEngine(q, edge_order)
    return engine.run(cover, check=check, trace=trace, check_bounds=check_bounds)


def join(q: JoinQuery, cover: CoverSolution | Sequence | None = None, edge_order: Sequence[int] | None = None) -> Relation:
    return join_with_stats(q, cover, edge_order)[0]


def agm_bound_check(q: JoinQuery, cover: CoverSolution, stats: JoinStats) -> dict:
    """Check the output against the cover bound and report per-node violations.

    Raises AssertionError when either the global bound or any per-call
    bound recorded during a ``check_bounds`` run was exceeded.
    """
    log_out = math.log(stats.out_size) if stats.out_size else -math.inf
    report = {
        "out_size": stats.out_size,
        "log_bound": cover.objective,
        "bound": math.exp(cover.objective),
        "global_ok": log_out <= cover.objective + math.log1p(BOUND_SLACK),
        "node_checks": stats.bound_checks,
        "node_violations": stats.bound_violations,
    }
    report["ok"] = report["global_ok"] and not stats.bound_violations
    if not report["ok"]:
        raise AssertionError(f"size bound violated: {report}")
    return report
