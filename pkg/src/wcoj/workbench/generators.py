"""Instance families with known join and intermediate sizes.

Every generator checks its closed-form cardinalities before returning.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Sequence

from ..relation import JoinQuery, Relation, SchemaError

C0 = 0  # constant used for attributes outside the hard core of an extension instance


@dataclass
class Instance:
    family: str
    query: JoinQuery
    params: dict = field(default_factory=dict)
    expected: dict = field(default_factory=dict)


def gen_triangle_instance(N: int) -> Instance:
    """``R(A,B) = S(B,C) = T(A,C) = {(0,j)} ∪ {(j,0)}`` for ``j = 1..N/2``.

    Every pairwise join has ``N^2/4 + N/2`` tuples while the triangle join is empty.
    """
    if N < 2 or N % 2:
        raise ValueError(f"the triangle family needs an even N >= 2, got {N}")
    h = N // 2
    rows = [(0, j) for j in range(1, h + 1)] + [(j, 0) for j in range(1, h + 1)]
    r, s, t = Relation(("A", "B"), rows, "R"), Relation(("B", "C"), rows, "S"), Relation(("A", "C"), rows, "T")
    pair = N * N // 4 + N // 2
    # |R ⋈ S| = sum over b of deg_R(b) * deg_S(b)
    deg_r: dict[int, int] = {}
    deg_s: dict[int, int] = {}
    for a, b in rows:
        deg_r[b] = deg_r.get(b, 0) + 1
        deg_s[a] = deg_s.get(a, 0) + 1
    assert len(r) == len(s) == len(t) == N
    assert sum(c * deg_s.get(b, 0) for b, c in deg_r.items()) == pair
    q = JoinQuery.from_relations([r, s, t], ("A", "B", "C"))
    return Instance("triangle", q, {"N": N}, {"relation_size": N, "pair_join": pair, "out": 0})


def _simple_rows(k: int, d: int) -> list[tuple[int, ...]]:
    """All tuples over ``{0..d}^k`` with at most one non-zero entry."""
    rows = [(0,) * k]
    for i in range(k):
        for v in range(1, d + 1):
            t = [0] * k
            t[i] = v
            rows.append(tuple(t))
    return rows


def nearest_lw_n(n: int, N: int) -> int:
    """Closest ``N' >= n`` with ``N' ≡ 1 (mod n-1)``."""
    k = max(1, round((N - 1) / (n - 1)))
    return 1 + k * (n - 1)


def gen_lw_bad_instance(n: int, N: int) -> Instance:
    """Loomis-Whitney instance on which every pairwise join is quadratic.

    Each ``R_i`` holds every tuple over ``[n] \\ {i}`` with at most one non-zero
    value from ``{0..(N-1)/(n-1)}``, so ``|R_i| = N`` and the join has
    ``N + (N-1)/(n-1)`` tuples.
    """
    if n < 3:
        raise ValueError("the Loomis-Whitney family needs n >= 3")
    if N < 1 or (N - 1) % (n - 1):
        raise ValueError(
            f"N={N} needs N ≡ 1 (mod {n - 1}); nearest valid N is {nearest_lw_n(n, N)}"
        )
    d = (N - 1) // (n - 1)
    attrs = tuple(f"v{i + 1}" for i in range(n))
    rels = []
    rows = _simple_rows(n - 1, d)
    for i in range(n):
        schema = attrs[:i] + attrs[i + 1:]
        rels.append(Relation(schema, rows, f"R{i + 1}"))
    out = N + d
    assert all(len(r) == N for r in rels)
    assert len(_simple_rows(n, d)) == out
    q = JoinQuery.from_relations(rels, attrs)
    return Instance("lwbad", q, {"n": n, "N": N}, {"relation_size": N, "out": out, "domain_max": d, "pair_join_min": (1 + d) ** 2})


def relaxed_lb_size(n: int, N: int, r: int) -> int:
    """Size of the relaxed join of the lower-bound family, from its definition.

    With ``r = 0`` all ``n+1`` relations must agree, which never happens.  For
    ``1 <= r < n`` only subsets holding every unary relation qualify and give
    ``[N]^n``; once ``r >= n`` the wide relation alone qualifies and adds its
    ``N`` diagonal tuples.
    """
    if r <= 0:
        return 0
    if r < n:
        return N**n
    return N**n + N


def gen_relaxed_lb_instance(n: int, N: int) -> Instance:
    """Unary relations ``R_i = [N]`` plus one wide relation of ``N`` diagonal tuples above ``N``."""
    if n < 1 or N < 1:
        raise ValueError("n and N must be positive")
    attrs = tuple(f"v{i + 1}" for i in range(n))
    rels = [Relation((a,), [(j,) for j in range(1, N + 1)], f"R{i + 1}") for i, a in enumerate(attrs)]
    rels.append(Relation(attrs, [(N + i,) * n for i in range(1, N + 1)], f"R{n + 1}"))
    assert all(len(r) == N for r in rels)
    q = JoinQuery.from_relations(rels, attrs)
    expected = {"relation_size": N, "grid_plus_diagonal": N + N**n}
    expected.update({f"r{r}": relaxed_lb_size(n, N, r) for r in range(0, n + 2)})
    return Instance("relaxlb", q, {"n": n, "N": N}, expected)


# -- extension instances ------------------------------------------------------


def check_extension(edges: Sequence[frozenset], n: int, U: frozenset, F: Sequence[int]) -> None:
    """Raise ``SchemaError`` naming the first failed condition on ``(U, F)``."""
    k = len(U)
    if k < 2:
        raise SchemaError("U needs at least two attributes")
    if not U <= frozenset(range(n)):
        raise SchemaError("U has attributes outside the query")
    if len(set(F)) != len(F) or any(not 0 <= f < len(edges) for f in F):
        raise SchemaError("F must list distinct edge indices")
    if len(F) != k:
        raise SchemaError(f"F must have |U| = {k} edges, got {len(F)}")
    for u in U:
        c = sum(1 for f in F if u in edges[f])
        if c != k - 1:
            raise SchemaError(f"condition (1): attribute {u} lies in {c} edges of F, not {k - 1}")
    for v in range(n):
        if v in U:
            continue
        touching = [e for e in edges if v in e]
        if all(e & U for e in touching):
            c = sum(1 for f in F if v in edges[f])
            if c < k - 1:
                raise SchemaError(f"condition (2): relevant attribute {v} lies in only {c} edges of F")
        if all(U <= e for e in touching):
            raise SchemaError(f"condition (3): attribute {v} is troublesome")


def gen_extension_instance(
    attributes: Sequence[str],
    edges: Sequence[Sequence[str]],
    U: Sequence[str],
    F: Sequence[int],
    N: int,
) -> Instance:
    """Hard instance for a hypergraph that contains a Loomis-Whitney core on ``U``.

    Each edge holds the simple relation over its ``U`` attributes, padded with
    the constant ``C0`` on the rest, so edges of ``F`` have ``N`` tuples each.
    """
    attributes = tuple(attributes)
    ids = {a: i for i, a in enumerate(attributes)}
    eids = [frozenset(ids[a] for a in e) for e in edges]
    uset = frozenset(ids[a] for a in U)
    check_extension(eids, len(attributes), uset, list(F))
    k = len(uset)
    if k < 3:
        raise SchemaError("the hard core needs |U| >= 3; with two attributes every plan is already quadratic")
    if N < 1 or (N - 1) % (k - 1):
        raise ValueError(f"N={N} needs N ≡ 1 (mod {k - 1}); nearest valid N is {nearest_lw_n(k, N)}")
    d = (N - 1) // (k - 1)
    rels = []
    for i, e in enumerate(edges):
        e = list(e)
        core = [j for j, a in enumerate(e) if ids[a] in uset]
        rows = []
        for t in _simple_rows(len(core), d) if core else [()]:
            row = [C0] * len(e)
            for j, v in zip(core, t):
                row[j] = v
            rows.append(tuple(row))
        rels.append(Relation(e, rows, f"R{i + 1}"))
    for f in F:
        assert len(rels[f]) == N
    q = JoinQuery.from_relations(rels, attributes)
    # the join is the simple relation over U padded with C0
    expected = {"out": 1 + k * d, "pair_join_min": (1 + d) ** 2, "domain_max": d}
    return Instance("ext", q, {"U": list(U), "F": list(F), "N": N}, expected)


def random_extension_instance(rng: random.Random, max_extra: int = 3) -> tuple[list, list, list, list] | None:
    """Random hypergraph around a Loomis-Whitney core that satisfies the extension conditions.

    Returns ``(attributes, edges, U, F)`` or ``None`` when the draw failed the checks.
    """
    k = rng.randint(3, 4)
    U = [f"u{i}" for i in range(k)]
    extra = [f"w{i}" for i in range(rng.randint(0, max_extra))]
    attributes = U + extra
    edges: list[list[str]] = []
    for i in range(k):
        e = [a for j, a in enumerate(U) if j != i]
        e += [w for w in extra if rng.random() < 0.8]
        edges.append(e)
    for _ in range(rng.randint(0, 2)):
        e = rng.sample(U, rng.randint(1, k - 1)) + [w for w in extra if rng.random() < 0.5]
        edges.append(e)
    for w in extra:
        if not any(w in e for e in edges):
            edges.append([w])
    F = list(range(k))
    ids = {a: i for i, a in enumerate(attributes)}
    try:
        check_extension([frozenset(ids[a] for a in e) for e in edges], len(attributes), frozenset(ids[a] for a in U), F)
    except SchemaError:
        return None
    return attributes, edges, U, F


def gen_random_instance(
    rng: random.Random,
    n: int,
    m: int,
    max_rows: int,
    domain: int,
    max_arity: int | None = None,
) -> JoinQuery:
    """Random query whose edges cover every attribute."""
    attrs = [f"a{i}" for i in range(n)]
    max_arity = min(max_arity or n, n)
    schemas = [rng.sample(attrs, rng.randint(1, max_arity)) for _ in range(m)]
    for a in attrs:
        if any(a in s for s in schemas):
            continue
        room = [s for s in schemas if len(s) < max_arity]
        if room:
            rng.choice(room).append(a)
        else:
            schemas.append([a])
    rels = []
    for i, s in enumerate(schemas):
        rows = [tuple(rng.randint(0, domain) for _ in s) for _ in range(rng.randint(1, max_rows))]
        rels.append(Relation(s, rows, f"R{i + 1}"))
    return JoinQuery.from_relations(rels, attrs)
