"""Fractional edge covers: LP solve, tightening, and the graph decomposition.

The cover LP is ``min sum_e ln(N_e) x_e`` subject to ``sum_{e ∋ v} x_e >= 1``
and ``x >= 0``.  The constraint matrix is 0/1 with unit right-hand side,
so the tableau is kept in exact rationals while the objective (irrational
logarithms) is carried in floats.  Every returned weight vector is thus an
exact basic feasible solution; only the choice of basis depends on floats.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .relation import JoinQuery, Relation, SchemaError, project

REDUCED_COST_EPS = 1e-11
FEAS_EPS = 1e-9
MAX_PIVOTS = 10_000


class SolverTrouble(RuntimeError):
    """The simplex hit its pivot limit or lost feasibility."""


@dataclass(frozen=True)
class CoverSolution:
    """Edge weights ``x`` (one per edge, in query edge order) and their cost."""

    x: tuple[Fraction, ...]
    objective: float
    fallback: bool = False

    @property
    def log_bound(self) -> float:
        return self.objective

    @property
    def bound(self) -> float:
        return math.exp(self.objective)

    @property
    def support(self) -> frozenset[int]:
        return frozenset(i for i, w in enumerate(self.x) if w > 0)

    def as_floats(self) -> list[float]:
        return [float(w) for w in self.x]


def log_sizes(sizes: Sequence[int]) -> list[float]:
    out = []
    for s in sizes:
        if s <= 0:
            raise ValueError("cover LP needs every relation to be non-empty")
        out.append(math.log(s))
    return out


def cover_objective(x: Sequence, sizes: Sequence[int]) -> float:
    return sum(float(w) * c for w, c in zip(x, log_sizes(sizes)) if w)


def is_feasible(edges: Sequence[frozenset[int]], n: int, x: Sequence, eps: float = 0.0) -> bool:
    if any(w < 0 for w in x):
        return False
    for v in range(n):
        total = sum(w for e, w in zip(edges, x) if v in e)
        if total < 1 - eps:
            return False
    return True


def _simplex(edges: Sequence[frozenset[int]], n: int, costs: Sequence[float]) -> tuple[Fraction, ...]:
    """Two-phase tableau simplex with Bland's rule.

    Columns: ``m`` edge variables, ``n`` surplus variables, ``n`` artificials.
    Rows: one equality ``sum_{e ∋ v} x_e - s_v + a_v = 1`` per attribute.
    """
    m = len(edges)
    ncols = m + 2 * n
    one, zero = Fraction(1), Fraction(0)
    rows: list[list[Fraction]] = []
    rhs: list[Fraction] = []
    for v in range(n):
        row = [one if v in e else zero for e in edges]
        row += [-one if j == v else zero for j in range(n)]
        row += [one if j == v else zero for j in range(n)]
        rows.append(row)
        rhs.append(one)
    basis = [m + n + v for v in range(n)]

    def pivot(r: int, c: int) -> None:
        prow = rows[r]
        p = prow[c]
        if p != 1:
            rows[r] = prow = [a / p for a in prow]
            rhs[r] = rhs[r] / p
        for i in range(len(rows)):
            if i == r:
                continue
            f = rows[i][c]
            if f:
                ri = rows[i]
                rows[i] = [a - f * b for a, b in zip(ri, prow)]
                rhs[i] = rhs[i] - f * rhs[r]
        basis[r] = c

    def run(cost_of, allowed: int, exact: bool) -> None:
        for _ in range(MAX_PIVOTS):
            cb = [cost_of(b) for b in basis]
            entering = -1
            for j in range(allowed):
                if j in basis:
                    continue
                d = cost_of(j) - sum(cb[i] * rows[i][j] for i in range(len(rows)) if rows[i][j])
                if (d < 0) if exact else (d < -REDUCED_COST_EPS):
                    entering = j
                    break
            if entering < 0:
                return
            best_r, best_ratio = -1, None
            for i in range(len(rows)):
                a = rows[i][entering]
                if a > 0:
                    ratio = rhs[i] / a
                    if best_ratio is None or ratio < best_ratio or (ratio == best_ratio and basis[i] < basis[best_r]):
                        best_r, best_ratio = i, ratio
            if best_r < 0:
                raise SolverTrouble("unbounded direction in a cover LP")
            pivot(best_r, entering)
        raise SolverTrouble("pivot limit reached")

    # phase 1: minimise the sum of artificials, exactly
    run(lambda j: one if j >= m + n else zero, ncols, exact=True)
    if any(rhs[i] != 0 for i, b in enumerate(basis) if b >= m + n):
        raise SolverTrouble("cover LP reported infeasible")
    # drive zero-level artificials out of the basis; drop redundant rows
    i = 0
    while i < len(rows):
        if basis[i] >= m + n:
            col = next((j for j in range(m + n) if rows[i][j] != 0), -1)
            if col < 0:
                del rows[i], rhs[i], basis[i]
                continue
            pivot(i, col)
        i += 1
    # phase 2 on the real costs, artificial columns excluded
    real_costs = list(costs) + [0.0] * n
    run(lambda j: real_costs[j] if j < m + n else 0.0, m + n, exact=False)
    x = [zero] * m
    for i, b in enumerate(basis):
        if b < m:
            x[b] = rhs[i]
    return tuple(x)


def solve_cover(edges: Sequence[Iterable[int]], n: int, sizes: Sequence[int]) -> CoverSolution:
    """Optimal basic cover for the hypergraph ``([n], edges)`` with relation sizes ``sizes``."""
    edges = [frozenset(e) for e in edges]
    if len(edges) != len(sizes):
        raise SchemaError("one size per edge is required")
    covered = set().union(*edges) if edges else set()
    if covered != set(range(n)):
        raise SchemaError(f"attributes {sorted(set(range(n)) - covered)} appear in no edge")
    costs = log_sizes(sizes)
    try:
        x = _simplex(edges, n, costs)
        fallback = False
        if not is_feasible(edges, n, x):
            raise SolverTrouble("solution failed the feasibility check")
    except SolverTrouble:
        x = tuple(Fraction(1) for _ in edges)
        fallback = True
    return CoverSolution(x, cover_objective(x, sizes), fallback)


def solve_cover_lp(q: JoinQuery) -> CoverSolution:
    return solve_cover(q.edges, q.n, q.sizes)


def uniform_cover(q: JoinQuery, weight: Fraction | int = 1) -> CoverSolution:
    x = tuple(Fraction(weight) for _ in q.relations)
    if not is_feasible(q.edges, q.n, x):
        raise ValueError(f"uniform weight {weight} is not a cover")
    return CoverSolution(x, cover_objective(x, q.sizes))


def as_cover(q: JoinQuery, weights: Sequence) -> CoverSolution:
    """Wrap user-supplied weights, converting floats to exact fractions."""
    x = tuple(w if isinstance(w, Fraction) else Fraction(w).limit_denominator(10**9) for w in weights)
    if len(x) != q.m:
        raise SchemaError(f"expected {q.m} weights, got {len(x)}")
    if not is_feasible(q.edges, q.n, x, FEAS_EPS):
        raise ValueError("weights are not a fractional edge cover")
    return CoverSolution(x, cover_objective(x, q.sizes))


# -- tightening ---------------------------------------------------------------


def tighten_cover(q: JoinQuery, cover: CoverSolution) -> tuple[JoinQuery, CoverSolution]:
    """Make every attribute constraint tight without changing the join.

    Repeatedly picks the smallest over-covered attribute ``v`` and the first
    edge ``f ∋ v`` with positive weight, splits ``f`` into its tight part
    ``f_t`` and the rest, and moves weight onto a new edge holding
    ``pi_{f_t}(R_f)``.  When ``f_t`` is empty no edge is added.
    """
    if not is_feasible(q.edges, q.n, cover.x):
        raise ValueError("tightening needs a feasible cover")
    relations = list(q.relations)
    edges = [set(e) for e in q.edges]
    x = [Fraction(w) for w in cover.x]

    def load(u: int) -> Fraction:
        return sum((w for e, w in zip(edges, x) if u in e), Fraction(0))

    for _ in range(4 * (q.n + 1) * (q.m + q.n + 1)):
        loads = [load(u) for u in range(q.n)]
        slack_attrs = [u for u in range(q.n) if loads[u] > 1]
        if not slack_attrs:
            break
        v = slack_attrs[0]
        f = next(i for i, e in enumerate(edges) if v in e and x[i] > 0)
        f_t = {u for u in edges[f] if loads[u] == 1}
        f_nt = edges[f] - f_t
        slack = min(loads[u] - 1 for u in f_nt)
        if x[f] <= slack:
            moved, x[f] = x[f], Fraction(0)
        else:
            moved = slack
            x[f] = x[f] - slack
        if f_t:
            names = [q.attributes[u] for u in sorted(f_t)]
            rel = project(relations[f], names)
            relations.append(Relation(rel.schema, rel.rows, f"{q.edge_name(f)}|{''.join(names)}"))
            edges.append(set(f_t))
            x.append(moved)
    else:
        raise RuntimeError("tightening did not converge")
    q2 = JoinQuery(tuple(relations), q.attributes, q.dictionary)
    return q2, CoverSolution(tuple(x), cover_objective(x, q2.sizes))


def is_tight(edges: Sequence[frozenset[int]], n: int, x: Sequence) -> bool:
    return all(sum((w for e, w in zip(edges, x) if v in e), Fraction(0)) == 1 for v in range(n))


# -- graphs -------------------------------------------------------------------

HALF = Fraction(1, 2)


@dataclass
class GraphCoverDecomposition:
    """Support of a half-integral optimal cover split into its pieces.

    ``stars`` holds the connected components of the weight-1 edges (each a
    star or a single unary edge); ``cycles`` holds the weight-1/2 odd cycles
    as edge-index lists in cycle order; ``zeros`` the unused edges.
    """

    x: tuple[Fraction, ...]
    objective: float
    stars: list[list[int]] = field(default_factory=list)
    cycles: list[list[int]] = field(default_factory=list)
    zeros: list[int] = field(default_factory=list)


def _components(edge_ids: list[int], edges: Sequence[frozenset[int]]) -> list[list[int]]:
    parent: dict[int, int] = {}

    def find(a: int) -> int:
        while parent.setdefault(a, a) != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i in edge_ids:
        vs = sorted(edges[i])
        for v in vs[1:]:
            parent[find(v)] = find(vs[0])
        find(vs[0])
    groups: dict[int, list[int]] = {}
    for i in edge_ids:
        groups.setdefault(find(min(edges[i])), []).append(i)
    return [sorted(g) for g in sorted(groups.values(), key=lambda g: min(g))]


def _cycle_order(component: list[int], edges: Sequence[frozenset[int]]) -> list[int] | None:
    """Edge ids of a simple cycle in traversal order, or None if not a cycle."""
    adj: dict[int, list[int]] = {}
    for i in component:
        if len(edges[i]) != 2:
            return None
        for v in edges[i]:
            adj.setdefault(v, []).append(i)
    if any(len(es) != 2 for es in adj.values()) or len(adj) != len(component):
        return None
    start = min(component)
    order = [start]
    v = max(edges[start])
    prev = start
    while True:
        nxt = next(i for i in adj[v] if i != prev)
        if nxt == start:
            break
        order.append(nxt)
        (v,) = edges[nxt] - {v}
        prev = nxt
    return order if len(order) == len(component) else None


def graph_cover_decompose(q: JoinQuery, cover: CoverSolution | None = None) -> GraphCoverDecomposition:
    """Optimal half-integral cover of a graph query and its star/odd-cycle structure."""
    edges = q.edges
    if any(len(e) > 2 for e in edges):
        raise SchemaError("graph covers need every relation to have at most two attributes")
    cover = solve_cover_lp(q) if cover is None else cover
    x = cover.x
    if any(w not in (0, HALF, 1) for w in x):
        raise ValueError(f"cover is not half-integral: {x}")
    ones = [i for i, w in enumerate(x) if w == 1]
    halves = [i for i, w in enumerate(x) if w == HALF]
    zeros = [i for i, w in enumerate(x) if w == 0]
    stars = _components(ones, edges)
    for comp in stars:
        if len(comp) > 1:
            if any(len(edges[i]) != 2 for i in comp):
                raise ValueError(f"weight-1 component {comp} mixes unary and binary edges")
            common = frozenset.intersection(*(edges[i] for i in comp))
            if not common:
                raise ValueError(f"weight-1 component {comp} is not a star")
    cycles = []
    for comp in _components(halves, edges):
        order = _cycle_order(comp, edges)
        if order is None or len(order) % 2 == 0:
            raise ValueError(f"weight-1/2 component {comp} is not an odd cycle")
        cycles.append(order)
    star_vertices = set().union(*(edges[i] for i in ones)) if ones else set()
    cycle_vertices = set().union(*(edges[i] for i in halves)) if halves else set()
    if star_vertices & cycle_vertices:
        raise ValueError("odd cycles share vertices with stars")
    if star_vertices | cycle_vertices != set(range(q.n)):
        raise ValueError("stars and cycles do not cover every attribute")
    return GraphCoverDecomposition(x, cover.objective, stars, cycles, zeros)
