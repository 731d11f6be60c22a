"""In-memory worst-case optimal natural joins."""
from .cover import CoverSolution, graph_cover_decompose, solve_cover, solve_cover_lp, tighten_cover
from .generic import JoinStats, agm_bound_check, join, join_with_stats
from .graph import cycle_join, graph_join
from .lw import lw_join, triangle_join
from .plan import build_qp_tree, check_total_order, total_order
from .preprocess import Atom, Var, fd_expand, reduce_full_query
from .relation import Dictionary, JoinQuery, Relation, brute_force_join, natural_join, project
from .relaxed import enumerate_cstar, relaxed_join
from .trie import TrieIndex, build_index

__all__ = [
    "Atom",
    "CoverSolution",
    "Dictionary",
    "JoinQuery",
    "JoinStats",
    "Relation",
    "TrieIndex",
    "Var",
    "agm_bound_check",
    "brute_force_join",
    "build_index",
    "build_qp_tree",
    "check_total_order",
    "cycle_join",
    "enumerate_cstar",
    "fd_expand",
    "graph_cover_decompose",
    "graph_join",
    "join",
    "join_with_stats",
    "lw_join",
    "natural_join",
    "project",
    "reduce_full_query",
    "relaxed_join",
    "solve_cover",
    "solve_cover_lp",
    "tighten_cover",
    "total_order",
    "triangle_join",
]
