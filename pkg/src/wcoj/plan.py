"""Query plan trees and the total attribute order derived from them."""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Sequence

from .relation import JoinQuery


@dataclass
class PlanNode:
    """One plan-tree node.

    ``label`` is the 1-based position ``k`` of the anchor edge in the edge
    order, ``edge`` the query index of that edge, ``universe`` the attribute
    ids the node joins on.
    """

    label: int
    edge: int
    universe: frozenset[int]
    anchor: frozenset[int] = frozenset()
    lc: PlanNode | None = None
    rc: PlanNode | None = None
    is_leaf: bool = False

    def nodes(self):
        yield self
        for child in (self.lc, self.rc):
            if child is not None:
                yield from child.nodes()

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "edge": self.edge,
            "universe": sorted(self.universe),
            "leaf": self.is_leaf,
            "lc": self.lc.to_dict() if self.lc else None,
            "rc": self.rc.to_dict() if self.rc else None,
        }


@dataclass
class QpTree:
    root: PlanNode
    edge_order: tuple[int, ...]

    def nodes(self) -> list[PlanNode]:
        return list(self.root.nodes())

    def to_dict(self) -> dict:
        return {"edge_order": list(self.edge_order), "root": self.root.to_dict()}


@dataclass(frozen=True)
class TotalOrder:
    order: tuple[int, ...]

    @property
    def positions(self) -> dict[int, int]:
        return {a: i for i, a in enumerate(self.order)}


def resolve_edge_order(q: JoinQuery, edge_order: Sequence[int] | None = None, seed: int | None = None) -> tuple[int, ...]:
    """Validate an edge permutation; default is input order, ``seed`` shuffles it."""
    if edge_order is None:
        order = list(range(q.m))
        if seed is not None:
            random.Random(seed).shuffle(order)
        return tuple(order)
    order = tuple(int(i) for i in edge_order)
    if sorted(order) != list(range(q.m)):
        raise ValueError(f"edge order {order} is not a permutation of 0..{q.m - 1}")
    return order


def build_qp_tree(q: JoinQuery, edge_order: Sequence[int] | None = None) -> QpTree:
    """Recursive plan skeleton; ``edge_order[k-1]`` is the edge anchored at label ``k``."""
    order = resolve_edge_order(q, edge_order)
    edges = q.edges
    ek = [edges[i] for i in order]

    def build(universe: frozenset[int], k: int) -> PlanNode | None:
        if all(not (ek[i] & universe) for i in range(k)):
            return None
        node = PlanNode(k, order[k - 1], universe, ek[k - 1])
        if k > 1 and any(not universe <= ek[i] for i in range(k)):
            node.lc = build(universe - ek[k - 1], k - 1)
            node.rc = build(universe & ek[k - 1], k - 1)
        else:
            node.is_leaf = True
        return node

    root = build(frozenset(range(q.n)), q.m)
    assert root is not None
    return QpTree(root, order)


def total_order(tree: QpTree) -> TotalOrder:
    """Print the leaves left to right; ties inside a block go in ascending id order.

    An internal node whose child is missing prints, in that child's place,
    the part of its universe the child would have covered (``U \\ e_k`` on
    the left, ``U ∩ e_k`` on the right), so every attribute is printed.
    """
    out: list[int] = []

    def emit(node: PlanNode) -> None:
        if node.is_leaf:
            out.extend(sorted(node.universe))
            return
        if node.lc is not None:
            emit(node.lc)
        else:
            out.extend(sorted(node.universe - node.anchor))
        if node.rc is not None:
            emit(node.rc)
        else:
            out.extend(sorted(node.universe & node.anchor))

    emit(tree.root)
    return TotalOrder(tuple(out))


def check_total_order(tree: QpTree, to: TotalOrder, edges: Sequence[frozenset[int]]) -> list[str]:
    """Violations of the contiguity and prefix properties, as messages."""
    pos = to.positions
    problems = []
    if sorted(to.order) != sorted(tree.root.universe):
        problems.append(f"order {to.order} is not a permutation of the attributes")
        return problems
    for node in tree.nodes():
        ps = sorted(pos[a] for a in node.universe)
        if ps[-1] - ps[0] + 1 != len(ps):
            problems.append(f"universe {sorted(node.universe)} of label {node.label} is not contiguous")
            continue
        if node.is_leaf or node.rc is None:
            continue
        before_u = {a for a in to.order[: ps[0]]}
        rc_start = min(pos[a] for a in node.rc.universe)
        before_rc = set(to.order[:rc_start])
        expected = before_u | (node.universe - edges[node.edge])
        if before_rc != expected:
            problems.append(f"right child of label {node.label} is preceded by {sorted(before_rc)}, expected {sorted(expected)}")
    return problems


def render_ascii(tree: QpTree, names: Sequence[str] | None = None, edge_names: Sequence[str] | None = None) -> str:
    def fmt_u(u: frozenset[int]) -> str:
        return "{" + ",".join(names[a] if names else str(a) for a in sorted(u)) + "}"

    lines: list[str] = []

    def walk(node: PlanNode | None, prefix: str, tag: str) -> None:
        if node is None:
            lines.append(f"{prefix}{tag}nil")
            return
        edge = edge_names[node.edge] if edge_names else str(node.edge)
        kind = "leaf" if node.is_leaf else "node"
        lines.append(f"{prefix}{tag}{kind} k={node.label} edge={edge} U={fmt_u(node.universe)}")
        if not node.is_leaf:
            walk(node.lc, prefix + "    ", "lc: ")
            walk(node.rc, prefix + "    ", "rc: ")

    walk(tree.root, "", "")
    return "\n".join(lines)


def plan_report(q: JoinQuery, edge_order: Sequence[int] | None = None) -> dict:
    tree = build_qp_tree(q, edge_order)
    to = total_order(tree)
    edge_names = [q.edge_name(i) for i in range(q.m)]
    return {
        "tree": tree.to_dict(),
        "total_order": [q.attributes[a] for a in to.order],
        "violations": check_total_order(tree, to, q.edges),
        "ascii": render_ascii(tree, q.attributes, edge_names),
    }


def dumps_plan(report: dict) -> str:
    return json.dumps({k: v for k, v in report.items() if k != "ascii"}, indent=2)
