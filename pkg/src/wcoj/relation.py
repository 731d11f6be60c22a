"""Relations, join queries and the primitive relational operators.

Values are stored as 64-bit integer codes. Strings are mapped to codes by a
per-query :class:`Dictionary` at ingestion time; every operator compares
codes only. All relations use set semantics.
"""
from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence


class SchemaError(ValueError):
    """Raised when attribute sets do not line up with a relation schema."""


class BudgetExceeded(RuntimeError):
    """Raised when an exhaustive computation would exceed its configured budget."""


class Dictionary:
    """Bijection between string values and integer codes.

    Integers pass through unchanged; strings get codes from a reserved range
    above ``STRING_BASE`` so they never collide with integer data.
    """

    STRING_BASE = 1 << 62

    def __init__(self) -> None:
        self._codes: dict[str, int] = {}
        self._strings: list[str] = []

    def encode(self, value: int | str) -> int:
        if isinstance(value, int):
            if value >= self.STRING_BASE:
                raise ValueError(f"integer value {value} collides with the string code range")
            return value
        try:
            as_int = int(value)
        except ValueError:
            pass
        else:
            if str(as_int) == value.strip():
                return self.encode(as_int)
        code = self._codes.get(value)
        if code is None:
            code = self.STRING_BASE + len(self._strings)
            self._codes[value] = code
            self._strings.append(value)
        return code

    def decode(self, code: int) -> int | str:
        if code >= self.STRING_BASE:
            return self._strings[code - self.STRING_BASE]
        return code

    def __len__(self) -> int:
        return len(self._strings)


class Relation:
    """An immutable, duplicate-free set of tuples over an ordered schema."""

    __slots__ = ("schema", "rows", "name")

    def __init__(self, schema: Sequence[str], rows: Iterable[Sequence[int]] = (), name: str | None = None):
        schema = tuple(schema)
        if len(set(schema)) != len(schema):
            raise SchemaError(f"duplicate attribute in schema {schema}")
        k = len(schema)
        frozen = frozenset(tuple(r) for r in rows)
        for row in frozen:
            if len(row) != k:
                raise SchemaError(f"row {row} does not match schema {schema}")
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "rows", frozen)
        object.__setattr__(self, "name", name)

    def __setattr__(self, key, value):
        raise AttributeError("Relation is immutable")

    @property
    def arity(self) -> int:
        return len(self.schema)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return iter(self.rows)

    def __contains__(self, row) -> bool:
        return tuple(row) in self.rows

    def __bool__(self) -> bool:
        return bool(self.rows)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        if set(self.schema) != set(other.schema):
            return False
        if self.schema == other.schema:
            return self.rows == other.rows
        return self.rows == other.reorder(self.schema).rows

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        label = f"{self.name}" if self.name else "Relation"
        return f"{label}({', '.join(self.schema)}; {len(self.rows)} rows)"

    def sorted_rows(self) -> list[tuple[int, ...]]:
        return sorted(self.rows)

    def positions(self, attrs: Iterable[str]) -> tuple[int, ...]:
        index = {a: i for i, a in enumerate(self.schema)}
        try:
            return tuple(index[a] for a in attrs)
        except KeyError as exc:
            raise SchemaError(f"attribute {exc.args[0]!r} not in schema {self.schema}") from None

    def reorder(self, schema: Sequence[str]) -> Relation:
        schema = tuple(schema)
        if set(schema) != set(self.schema) or len(schema) != len(self.schema):
            raise SchemaError(f"{schema} is not a permutation of {self.schema}")
        pos = self.positions(schema)
        return Relation(schema, (tuple(r[p] for p in pos) for r in self.rows), self.name)

    def renamed(self, schema: Sequence[str], name: str | None = None) -> Relation:
        """Same rows under new column names (positional)."""
        if len(schema) != self.arity:
            raise SchemaError(f"cannot rename {self.schema} to {tuple(schema)}")
        return Relation(schema, self.rows, name if name is not None else self.name)

    def to_dicts(self) -> list[dict[str, int]]:
        return [dict(zip(self.schema, r)) for r in self.sorted_rows()]


def project(r: Relation, attrs: Iterable[str], order: Sequence[str] | None = None) -> Relation:
    """Duplicate-free projection of ``r`` onto ``attrs``.

    The result schema follows ``order`` restricted to ``attrs`` when given,
    otherwise the schema order of ``r``.
    """
    wanted = set(attrs)
    missing = wanted - set(r.schema)
    if missing:
        raise SchemaError(f"cannot project {r.schema} onto missing attributes {sorted(missing)}")
    ranking = order if order is not None else r.schema
    schema = [a for a in ranking if a in wanted]
    if len(schema) != len(wanted):
        raise SchemaError(f"order {tuple(ranking)} does not mention all of {sorted(wanted)}")
    pos = r.positions(schema)
    return Relation(schema, (tuple(row[p] for p in pos) for row in r.rows), r.name)


def section(r: Relation, t: Mapping[str, int]) -> Relation:
    """The ``t``-section of ``r``: rows agreeing with ``t``, projected off ``t``'s support."""
    bound = r.positions(t.keys())
    want = tuple(t.values())
    rest = [a for a in r.schema if a not in t]
    rest_pos = r.positions(rest)
    rows = (tuple(row[p] for p in rest_pos) for row in r.rows if tuple(row[p] for p in bound) == want)
    return Relation(rest, rows, r.name)


def semijoin(r: Relation, s: Relation) -> Relation:
    shared = [a for a in r.schema if a in set(s.schema)]
    rp = r.positions(shared)
    keys = set(tuple(row[p] for p in s.positions(shared)) for row in s.rows)
    return Relation(r.schema, (row for row in r.rows if tuple(row[p] for p in rp) in keys), r.name)


def natural_join(r: Relation, s: Relation) -> Relation:
    """Hash join of two relations; output schema is ``r.schema`` followed by the new columns of ``s``."""
    s_set = set(s.schema)
    shared = [a for a in r.schema if a in s_set]
    extra = [a for a in s.schema if a not in set(r.schema)]
    index: dict[tuple, list[tuple]] = defaultdict(list)
    sk = s.positions(shared)
    se = s.positions(extra)
    for row in s.rows:
        index[tuple(row[p] for p in sk)].append(tuple(row[p] for p in se))
    rk = r.positions(shared)
    out = []
    for row in r.rows:
        for tail in index.get(tuple(row[p] for p in rk), ()):
            out.append(row + tail)
    return Relation(tuple(r.schema) + tuple(extra), out)


@dataclass(frozen=True)
class JoinQuery:
    """A natural join over relations; the hypergraph has one edge per relation.

    ``attributes`` fixes attribute ids: the id of an attribute is its index.
    Edges may repeat as sets (multiset hypergraph).
    """

    relations: tuple[Relation, ...]
    attributes: tuple[str, ...]
    dictionary: Dictionary | None = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "relations", tuple(self.relations))
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if len(set(self.attributes)) != len(self.attributes):
            raise SchemaError(f"duplicate attribute in {self.attributes}")
        if not self.relations:
            raise SchemaError("a join query needs at least one relation")
        known = set(self.attributes)
        seen: set[str] = set()
        for rel in self.relations:
            if rel.arity == 0:
                raise SchemaError(f"relation {rel!r} has an empty schema")
            stray = set(rel.schema) - known
            if stray:
                raise SchemaError(f"relation {rel!r} uses unknown attributes {sorted(stray)}")
            seen.update(rel.schema)
        uncovered = known - seen
        if uncovered:
            raise SchemaError(f"attributes {sorted(uncovered)} appear in no edge")

    @classmethod
    def from_relations(
        cls,
        relations: Iterable[Relation],
        attributes: Sequence[str] | None = None,
        dictionary: Dictionary | None = None,
    ) -> JoinQuery:
        relations = tuple(relations)
        if attributes is None:
            attributes = list(dict.fromkeys(a for r in relations for a in r.schema))
        return cls(relations, tuple(attributes), dictionary)

    @property
    def n(self) -> int:
        return len(self.attributes)

    @property
    def m(self) -> int:
        return len(self.relations)

    @property
    def attr_id(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.attributes)}

    @property
    def edges(self) -> tuple[frozenset[int], ...]:
        ids = self.attr_id
        return tuple(frozenset(ids[a] for a in r.schema) for r in self.relations)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(r) for r in self.relations)

    def edge_name(self, i: int) -> str:
        return self.relations[i].name or f"e{i + 1}"

    def has_empty_relation(self) -> bool:
        return any(len(r) == 0 for r in self.relations)

    def subquery(self, edge_indices: Iterable[int]) -> JoinQuery:
        """The query on the same attribute universe restricted to some edges."""
        return JoinQuery(tuple(self.relations[i] for i in edge_indices), self.attributes, self.dictionary)

    def empty_output(self) -> Relation:
        return Relation(self.attributes, ())


def brute_force_join(q: JoinQuery, budget: int = 10**8) -> Relation:
    """Reference join by nested loops over the attribute domains.

    Each attribute ranges over the values it takes in the relations that
    contain it; a candidate is kept only if every edge projection is present.
    Intended as a test oracle for small instances.
    """
    if q.has_empty_relation():
        return q.empty_output()
    domains: list[set[int]] = []
    for a in q.attributes:
        dom: set[int] | None = None
        for rel in q.relations:
            if a in rel.schema:
                p = rel.schema.index(a)
                col = {row[p] for row in rel.rows}
                dom = col if dom is None else dom & col
        domains.append(dom or set())
    estimate = math.prod(len(d) for d in domains)
    if estimate > budget:
        raise BudgetExceeded(f"brute force would enumerate {estimate} candidates (budget {budget})")

    ids = q.attr_id
    # check each edge as soon as its last attribute (in id order) is bound
    checks: list[list[tuple[tuple[int, ...], frozenset]]] = [[] for _ in q.attributes]
    for rel in q.relations:
        pos = tuple(ids[a] for a in rel.schema)
        checks[max(pos)].append((pos, rel.rows))
    ordered_domains = [sorted(d) for d in domains]
    out: list[tuple[int, ...]] = []
    current = [0] * q.n

    def extend(level: int) -> None:
        for v in ordered_domains[level]:
            current[level] = v
            if all(tuple(current[p] for p in pos) in rows for pos, rows in checks[level]):
                if level + 1 == q.n:
                    out.append(tuple(current))
                else:
                    extend(level + 1)

    if q.n:
        extend(0)
    return Relation(q.attributes, out)


def cross_product(relations: Sequence[Relation]) -> Relation:
    schema = tuple(itertools.chain.from_iterable(r.schema for r in relations))
    rows = (tuple(itertools.chain.from_iterable(parts)) for parts in itertools.product(*(r.rows for r in relations)))
    return Relation(schema, rows)
