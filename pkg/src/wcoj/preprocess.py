"""Reductions applied before joining.

``reduce_full_query`` turns a full conjunctive query, whose subgoals may
carry constants and repeated variables, into a natural join with distinct
attributes per relation.  ``fd_expand`` widens every relation by the
attributes its own attributes determine under simple functional
dependencies.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .relation import Dictionary, JoinQuery, Relation, SchemaError


@dataclass(frozen=True)
class Var:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Atom:
    """A subgoal ``relation(terms)``; a term is a ``Var`` or a constant."""

    relation: str
    terms: tuple

    def __init__(self, relation: str, terms: Iterable):
        object.__setattr__(self, "relation", relation)
        object.__setattr__(self, "terms", tuple(terms))

    @property
    def variables(self) -> list[str]:
        return list(dict.fromkeys(t.name for t in self.terms if isinstance(t, Var)))


class NotFullQuery(SchemaError):
    pass


def parse_atom(text: str) -> Atom:
    """Parse ``R(x, y, 3)``: identifiers starting with a letter are variables, the rest constants.

    Quoted terms (``'abc'``) are string constants.
    """
    text = text.strip()
    if "(" not in text or not text.endswith(")"):
        raise SchemaError(f"cannot parse atom {text!r}")
    name, body = text[:-1].split("(", 1)
    terms: list = []
    for raw in (p.strip() for p in body.split(",")) if body.strip() else ():
        if len(raw) >= 2 and raw[0] == raw[-1] and raw[0] in "'\"":
            terms.append(raw[1:-1])
        elif raw[:1].isalpha() or raw[:1] == "_":
            terms.append(Var(raw))
        else:
            terms.append(int(raw))
    return Atom(name.strip(), terms)


def _rows_of(stored) -> Iterable[tuple]:
    return stored.rows if isinstance(stored, Relation) else (tuple(r) for r in stored)


def reduce_full_query(
    atoms: Sequence[Atom],
    db: Mapping[str, Relation | Iterable[Sequence[int]]],
    head: Sequence[str] | None = None,
    dictionary: Dictionary | None = None,
) -> JoinQuery:
    """Equivalent natural join in which no relation repeats an attribute.

    Each subgoal becomes one relation over its distinct variables, built in one
    scan of the stored relation that keeps rows matching the constants and the
    repeated-variable equalities.  Subgoals without variables act as filters:
    a failing one empties the result.  Several subgoals over the same stored
    relation give several edges.
    """
    body_vars = list(dict.fromkeys(v for a in atoms for v in a.variables))
    if not body_vars:
        raise NotFullQuery("the query has no variables")
    if head is not None:
        head = list(head)
        if set(head) != set(body_vars) or len(set(head)) != len(head):
            raise NotFullQuery(f"head {head} must list every body variable exactly once: {body_vars}")
    attributes = head if head is not None else body_vars
    relations: list[Relation] = []
    empty = False
    for k, atom in enumerate(atoms):
        if atom.relation not in db:
            raise SchemaError(f"unknown relation {atom.relation!r}")
        consts: list[tuple[int, int]] = []
        first: dict[str, int] = {}
        repeats: list[tuple[int, int]] = []
        for pos, t in enumerate(atom.terms):
            if isinstance(t, Var):
                if t.name in first:
                    repeats.append((pos, first[t.name]))
                else:
                    first[t.name] = pos
            else:
                value = dictionary.encode(t) if dictionary is not None else t
                consts.append((pos, value))
        keep_pos = list(first.values())
        arity = len(atom.terms)
        rows = []
        for row in _rows_of(db[atom.relation]):
            if len(row) != arity:
                raise SchemaError(f"{atom.relation} row {row} does not have arity {arity}")
            if all(row[p] == c for p, c in consts) and all(row[p] == row[q] for p, q in repeats):
                rows.append(tuple(row[p] for p in keep_pos))
        if not first:
            empty = empty or not rows
            continue
        relations.append(Relation(list(first), rows, f"{atom.relation}#{k + 1}"))
    if empty:
        relations = [Relation(r.schema, (), r.name) for r in relations]
    return JoinQuery.from_relations(relations, attributes, dictionary)


# -- functional dependencies ----------------------------------------------------


class FdViolation(SchemaError):
    pass


@dataclass(frozen=True)
class Fd:
    """``edge.u -> edge.v``: in relation ``edge`` the value of ``u`` fixes the value of ``v``."""

    edge: int
    u: str
    v: str


def _as_fd(f) -> Fd:
    return f if isinstance(f, Fd) else Fd(int(f[0]), str(f[1]), str(f[2]))


def fd_maps(q: JoinQuery, fds: Iterable) -> dict[Fd, dict[int, int]]:
    """Validate every FD against its relation and return its lookup table."""
    out: dict[Fd, dict[int, int]] = {}
    for f in map(_as_fd, fds):
        if not 0 <= f.edge < q.m:
            raise SchemaError(f"FD {f} refers to a missing relation")
        rel = q.relations[f.edge]
        if f.u not in rel.schema or f.v not in rel.schema:
            raise SchemaError(f"FD {f} uses attributes outside {q.edge_name(f.edge)}{rel.schema}")
        pu, pv = rel.positions([f.u, f.v])
        table: dict[int, int] = {}
        for row in rel.rows:
            seen = table.setdefault(row[pu], row[pv])
            if seen != row[pv]:
                raise FdViolation(
                    f"{q.edge_name(f.edge)} violates {f.u} -> {f.v}: "
                    f"{f.u}={row[pu]} maps to both {seen} and {row[pv]}"
                )
        out[f] = table
    return out


def fd_closure(attrs: Iterable[str], fds: Iterable) -> list[str]:
    """Attributes reachable from ``attrs`` in the FD graph, in breadth-first order."""
    graph: dict[str, list[str]] = {}
    for f in map(_as_fd, fds):
        graph.setdefault(f.u, []).append(f.v)
    order = list(dict.fromkeys(attrs))
    seen = set(order)
    queue = deque(order)
    while queue:
        a = queue.popleft()
        for b in graph.get(a, ()):
            if b not in seen:
                seen.add(b)
                order.append(b)
                queue.append(b)
    return order


def fd_expand(q: JoinQuery, fds: Iterable, missing: str = "error") -> JoinQuery:
    """Widen each relation to the FD closure of its attributes.

    New columns are filled attribute by attribute with lookups in the FD's own
    relation.  A value with no lookup entry cannot take part in any output
    tuple; ``missing="error"`` rejects such data, ``missing="drop"`` removes
    the row.
    """
    if missing not in ("error", "drop"):
        raise ValueError("missing must be 'error' or 'drop'")
    fds = [_as_fd(f) for f in fds]
    if not fds:
        return q
    maps = fd_maps(q, fds)
    relations = []
    for i, rel in enumerate(q.relations):
        closure = fd_closure(rel.schema, fds)
        schema = list(rel.schema)
        rows = [tuple(r) for r in rel.rows]
        for target in closure[len(schema):]:
            # the first FD (in input order) into target whose source is already present
            f = next(f for f in fds if f.v == target and f.u in schema)
            table = maps[f]
            pu = schema.index(f.u)
            grown = []
            for row in rows:
                val = table.get(row[pu])
                if val is None:
                    if missing == "error":
                        raise FdViolation(
                            f"{q.edge_name(i)} has {f.u}={row[pu]} with no entry for {f.u} -> {f.v} in {q.edge_name(f.edge)}"
                        )
                    continue
                grown.append(row + (val,))
            rows = grown
            schema.append(target)
        relations.append(Relation(schema, rows, rel.name))
    return JoinQuery(tuple(relations), q.attributes, q.dictionary)
