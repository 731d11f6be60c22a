"""Relaxed joins: tuples that agree with at least ``m - r`` of the ``m`` relations.

Only edge subsets that cover every attribute take part.  Subsets are grouped
by the support of their optimal basic cover; each group needs a single join
over that support, whose output is then filtered by counting the relations
each tuple agrees with.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

from .cover import CoverSolution, solve_cover
from .generic import join_with_stats
from .relation import BudgetExceeded, JoinQuery, Relation, brute_force_join, natural_join
from .trie import WorkCounter, build_index

DEFAULT_BUDGET = 2**20

Subset = tuple[int, ...]


@dataclass
class CoverFamily:
    """Qualifying edge subsets of a relaxed query.

    ``c_full`` holds every subset with at least ``m - r`` edges covering all
    attributes, ``c_hat`` its inclusion-minimal members, ``c_star`` one
    representative (the lexicographically smallest) per distinct cover support.
    """

    m: int
    r: int
    c_full: list[Subset]
    c_hat: list[Subset]
    c_star: list[Subset]
    support: dict[Subset, Subset] = field(default_factory=dict)
    log_lp_opt: dict[Subset, float] = field(default_factory=dict)
    covers: dict[Subset, CoverSolution] = field(default_factory=dict)

    def size_bound(self) -> float:
        return sum(math.exp(self.log_lp_opt[s]) for s in self.c_star)


@dataclass
class RelaxedStats:
    work: int = 0
    out_size: int = 0
    candidates: int = 0
    joins: list[dict] = field(default_factory=list)


def subset_count(m: int, r: int) -> int:
    """Number of edge subsets with at least ``m - r`` members."""
    return sum(math.comb(m, k) for k in range(0, min(r, m) + 1))


def _check_r(q: JoinQuery, r: int) -> None:
    if not 0 <= r <= q.m:
        raise ValueError(f"relaxation {r} outside 0..{q.m}")


def qualifying_subsets(q: JoinQuery, r: int, budget: int = DEFAULT_BUDGET) -> list[Subset]:
    """All subsets with at least ``m - r`` edges whose union is every attribute."""
    _check_r(q, r)
    total = subset_count(q.m, r)
    if total > budget:
        raise BudgetExceeded(f"relaxation {r} on {q.m} relations needs {total} subsets, budget is {budget}")
    edges = q.edges
    everything = frozenset(range(q.n))
    out = []
    for size in range(q.m - r, q.m + 1):
        if size == 0:
            continue
        for s in combinations(range(q.m), size):
            if frozenset().union(*(edges[i] for i in s)) == everything:
                out.append(s)
    return sorted(out)


def enumerate_cstar(q: JoinQuery, r: int, budget: int = DEFAULT_BUDGET) -> CoverFamily:
    c_full = qualifying_subsets(q, r, budget)
    full_sets = [frozenset(s) for s in c_full]
    c_hat = [s for s, fs in zip(c_full, full_sets) if not any(o < fs for o in full_sets)]
    fam = CoverFamily(q.m, r, c_full, c_hat, [])
    edges = q.edges
    seen: dict[Subset, Subset] = {}
    for s in c_hat:
        sol = solve_cover([edges[i] for i in s], q.n, [max(q.sizes[i], 1) for i in s])
        supp = tuple(sorted(s[j] for j, w in enumerate(sol.x) if w > 0))
        fam.support[s] = supp
        fam.log_lp_opt[s] = sol.objective
        fam.covers[s] = sol
        if supp not in seen or s < seen[supp]:
            seen[supp] = s
    fam.c_star = sorted(seen.values())
    return fam


def relaxed_join_with_stats(
    q: JoinQuery,
    r: int,
    budget: int = DEFAULT_BUDGET,
    family: CoverFamily | None = None,
) -> tuple[Relation, RelaxedStats]:
    fam = family if family is not None else enumerate_cstar(q, r, budget)
    stats = RelaxedStats()
    ids = q.attr_id
    # one trie per relation, keyed in attribute id order, for the membership probes
    tries = []
    for rel in q.relations:
        order = sorted(rel.schema, key=ids.__getitem__)
        tries.append((build_index(rel, order), [ids[a] for a in order]))
    need = q.m - r
    counter = WorkCounter()
    out: set[tuple[int, ...]] = set()
    for s in fam.c_star:
        supp = fam.support[s]
        sol = fam.covers[s]
        weights = [sol.x[s.index(i)] for i in supp]
        sub = q.subquery(supp)
        res, js = join_with_stats(sub, weights)
        stats.work += js.work
        stats.candidates += len(res)
        kept = 0
        for t in res.rows:
            agree = 0
            for trie, pos in tries:
                if trie.prefix_contains([t[p] for p in pos], counter):
                    agree += 1
            if agree >= need:
                out.add(t)
                kept += 1
        stats.joins.append({"subset": list(s), "support": list(supp), "log_bound": fam.log_lp_opt[s], "out": len(res), "kept": kept})
    stats.work += counter.steps
    stats.out_size = len(out)
    return Relation(q.attributes, out), stats


def relaxed_join(q: JoinQuery, r: int, budget: int = DEFAULT_BUDGET) -> Relation:
    return relaxed_join_with_stats(q, r, budget)[0]


def relaxed_brute_force(q: JoinQuery, r: int, budget: int = DEFAULT_BUDGET) -> Relation:
    """Reference: union of the joins of every qualifying subset."""
    out: set[tuple[int, ...]] = set()
    for s in qualifying_subsets(q, r, budget):
        res = brute_force_join(q.subquery(s))
        out |= res.reorder(q.attributes).rows
    return Relation(q.attributes, out)


def relaxed_pairwise(q: JoinQuery, r: int, budget: int = DEFAULT_BUDGET) -> Relation:
    """Second reference built from pairwise hash joins, for larger instances."""
    out: set[tuple[int, ...]] = set()
    for s in qualifying_subsets(q, r, budget):
        acc = q.relations[s[0]]
        for i in s[1:]:
            acc = natural_join(acc, q.relations[i])
        out |= acc.reorder(q.attributes).rows
    return Relation(q.attributes, out)
