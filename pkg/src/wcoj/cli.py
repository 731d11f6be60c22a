"""Command line entry point: ``wcoj gen|join|solve-lp|plan|bench|verify``."""
from __future__ import annotations

import argparse
import json
import random
import sys
from pathlib import Path

from .cover import solve_cover_lp, tighten_cover
from .generic import agm_bound_check, join_with_stats
from .graph import GraphStats, graph_join
from .io import load_query, save_query
from .lw import LwStats, TriangleStats, lw_join, triangle_query_join
from .plan import plan_report, resolve_edge_order
from .relation import JoinQuery, Relation, brute_force_join
from .relaxed import relaxed_join_with_stats
from .workbench.baseline import best_binary_plan, binary_join_plan
from .workbench.bench import ALGOS, bench_compare, write_report
from .workbench.generators import (
    gen_extension_instance,
    gen_lw_bad_instance,
    gen_random_instance,
    gen_relaxed_lb_instance,
    gen_triangle_instance,
    random_extension_instance,
)


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _emit(obj, path: str | None = None) -> None:
    text = json.dumps(obj, indent=2, default=str)
    if path:
        Path(path).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _print_rows(rel: Relation, q: JoinQuery, limit: int | None) -> None:
    dec = q.dictionary.decode if q.dictionary is not None else (lambda v: v)
    print("\t".join(rel.schema))
    for i, row in enumerate(rel.sorted_rows()):
        if limit is not None and i >= limit:
            print(f"... {len(rel) - limit} more")
            break
        print("\t".join(str(dec(v)) for v in row))


# -- gen ------------------------------------------------------------------------


def cmd_gen(args) -> int:
    if args.family == "triangle":
        inst = gen_triangle_instance(args.N)
    elif args.family == "lwbad":
        inst = gen_lw_bad_instance(args.n, args.N)
    elif args.family == "relaxlb":
        inst = gen_relaxed_lb_instance(args.n, args.N)
    else:
        if args.hypergraph:
            hg = json.loads(Path(args.hypergraph).read_text(encoding="utf-8"))
            attrs, edges, U, F = hg["attributes"], hg["edges"], hg["U"], hg["F"]
        else:
            rng = random.Random(args.seed)
            drawn = None
            while drawn is None:
                drawn = random_extension_instance(rng)
            attrs, edges, U, F = drawn
        inst = gen_extension_instance(attrs, edges, U, F, args.N)
    path = save_query(args.out, inst.query, args.stem or inst.family)
    _emit({"query": str(path), "family": inst.family, "params": inst.params, "expected": inst.expected})
    return 0


# -- join -----------------------------------------------------------------------


def _edge_order(args, q: JoinQuery):
    if args.edge_order:
        return resolve_edge_order(q, _int_list(args.edge_order))
    if args.seed is not None:
        return resolve_edge_order(q, seed=args.seed)
    return None


def cmd_join(args) -> int:
    loaded = load_query(args.query)
    q = loaded.expanded(args.fd_missing)
    stats: dict
    if args.relax is not None:
        out, rs = relaxed_join_with_stats(q, args.relax)
        stats = {"algo": "relaxed", **rs.__dict__}
    elif args.algo == "generic":
        out, js = join_with_stats(q, edge_order=_edge_order(args, q), trace=args.trace, check_bounds=args.check_bounds)
        stats = {"algo": "generic", **js.to_dict()}
        if args.check_bounds:
            stats["bound_report"] = agm_bound_check(q, solve_cover_lp(q), js) if not q.has_empty_relation() else None
        if args.trace:
            for ev in js.trace or []:
                print(json.dumps(ev), file=sys.stderr)
    elif args.algo == "lw":
        ls = LwStats()
        out = lw_join(q, check=args.check_bounds, stats=ls)
        stats = {"algo": "lw", **ls.__dict__}
    elif args.algo == "triangle":
        ts = TriangleStats()
        out = triangle_query_join(q, stats=ts)
        stats = {"algo": "triangle", **ts.__dict__, "candidates": ts.candidates}
    elif args.algo == "graph":
        gs = GraphStats()
        out = graph_join(q, gs)
        stats = {"algo": "graph", **gs.__dict__}
    elif args.algo == "binary":
        if args.best:
            out, bs = best_binary_plan(q)
        else:
            out, bs = binary_join_plan(q, _edge_order(args, q))
        stats = {"algo": "binary", **bs.to_dict()}
    else:
        out = brute_force_join(q)
        stats = {"algo": "brute"}
    stats["out_size"] = len(out)
    if args.stats:
        _emit(stats, args.stats)
    if args.count:
        print(len(out))
    else:
        _print_rows(out, q, args.limit)
    return 0


# -- solve-lp / plan ------------------------------------------------------------


def cmd_solve_lp(args) -> int:
    loaded = load_query(args.query)
    q = loaded.expanded(args.fd_missing)
    sol = solve_cover_lp(q)
    doc = {
        "x": {q.edge_name(i): str(w) for i, w in enumerate(sol.x)},
        "x_float": {q.edge_name(i): float(w) for i, w in enumerate(sol.x)},
        "objective": sol.objective,
        "bound": sol.bound,
        "fallback": sol.fallback,
    }
    if args.tighten:
        q2, tight = tighten_cover(q, sol)
        doc["tightened"] = {
            "edges": {q2.edge_name(i): list(r.schema) for i, r in enumerate(q2.relations)},
            "x": {q2.edge_name(i): str(w) for i, w in enumerate(tight.x)},
            "objective": tight.objective,
        }
    _emit(doc)
    return 0


def cmd_plan(args) -> int:
    q = load_query(args.query).query
    report = plan_report(q, _edge_order(args, q))
    if args.ascii:
        print(report["ascii"])
    else:
        _emit({k: v for k, v in report.items() if k != "ascii"})
        print(report["ascii"])
    return 0


# -- bench / verify -------------------------------------------------------------


def cmd_bench(args) -> int:
    algos = [a for a in args.algos.split(",") if a]
    report = bench_compare(
        args.family,
        _int_list(args.N),
        algos,
        n=args.n,
        timeout=args.timeout,
        progress=(lambda c: print(f"{c.family} N={c.N} {c.algo}: work={c.work} {c.status}", file=sys.stderr)),
    )
    write_report(report, args.csv, args.json)
    if not args.csv and not args.json:
        _emit(report)
    else:
        _emit(report["slopes"])
    return 0


def verify_query(q: JoinQuery) -> dict[str, bool]:
    """Run every applicable algorithm and compare with the nested-loop oracle."""
    truth = brute_force_join(q)
    res = {"generic": join_with_stats(q)[0] == truth}
    res["binary"] = binary_join_plan(q)[0] == truth
    if all(r.arity <= 2 for r in q.relations):
        res["graph"] = graph_join(q) == truth
    try:
        res["lw"] = lw_join(q) == truth
    except ValueError:
        pass
    res["relaxed0"] = relaxed_join_with_stats(q, 0)[0] == truth
    return res


def cmd_verify(args) -> int:
    bad = 0
    if args.query:
        qs = [("query", load_query(args.query).expanded(args.fd_missing))]
    else:
        rng = random.Random(args.seed)
        qs = [
            (f"random{i}", gen_random_instance(rng, rng.randint(1, 5), rng.randint(1, 6), 20, 4))
            for i in range(args.random)
        ]
    for name, q in qs:
        res = verify_query(q)
        ok = all(res.values())
        bad += not ok
        if not ok or args.query:
            print(f"{name}: " + " ".join(f"{k}={'ok' if v else 'MISMATCH'}" for k, v in res.items()))
    print(f"verified {len(qs)} instance(s), {bad} with mismatches")
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wcoj", description="In-memory worst-case optimal natural joins.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a generated instance family")
    g.add_argument("family", choices=["triangle", "lwbad", "relaxlb", "ext"])
    g.add_argument("--N", type=int, required=True)
    g.add_argument("--n", type=int, default=3, help="attributes (lwbad, relaxlb)")
    g.add_argument("--hypergraph", help="ext: JSON with attributes, edges, U and F")
    g.add_argument("--seed", type=int, default=0, help="ext: seed for a random valid hypergraph")
    g.add_argument("--out", required=True, help="output directory")
    g.add_argument("--stem", help="file name stem")
    g.set_defaults(func=cmd_gen)

    j = sub.add_parser("join", help="evaluate a query file")
    j.add_argument("query")
    j.add_argument("--algo", choices=["generic", "lw", "triangle", "graph", "binary", "brute"], default="generic")
    j.add_argument("--edge-order", help="comma-separated edge permutation (generic, binary)")
    j.add_argument("--seed", type=int, help="shuffle the edge order with this seed")
    j.add_argument("--relax", type=int, help="relaxed join keeping tuples that agree with at least m-r relations")
    j.add_argument("--best", action="store_true", help="binary: try every left-deep order")
    j.add_argument("--trace", action="store_true", help="generic: print per-call decisions to stderr")
    j.add_argument("--check-bounds", action="store_true", help="assert size bounds while joining")
    j.add_argument("--stats", help="write statistics JSON here")
    j.add_argument("--count", action="store_true", help="print only the output size")
    j.add_argument("--limit", type=int, help="print at most this many rows")
    j.add_argument("--fd-missing", choices=["error", "drop"], default="error")
    j.set_defaults(func=cmd_join)

    s = sub.add_parser("solve-lp", help="optimal fractional edge cover of a query")
    s.add_argument("query")
    s.add_argument("--tighten", action="store_true", help="also print the tightened instance")
    s.add_argument("--fd-missing", choices=["error", "drop"], default="error")
    s.set_defaults(func=cmd_solve_lp)

    pl = sub.add_parser("plan", help="plan tree and total attribute order")
    pl.add_argument("query")
    pl.add_argument("--edge-order")
    pl.add_argument("--seed", type=int)
    pl.add_argument("--ascii", action="store_true", help="only the ASCII rendering")
    pl.set_defaults(func=cmd_plan)

    b = sub.add_parser("bench", help="compare algorithms on a family")
    b.add_argument("--family", choices=["triangle", "lwbad", "relaxlb"], default="triangle")
    b.add_argument("--N", required=True, help="comma-separated sizes")
    b.add_argument("--algos", default="generic,binary", help=f"comma-separated subset of {','.join(ALGOS)}")
    b.add_argument("--n", type=int, default=3)
    b.add_argument("--timeout", type=float, help="seconds per cell")
    b.add_argument("--csv")
    b.add_argument("--json")
    b.set_defaults(func=cmd_bench)

    v = sub.add_parser("verify", help="cross-check algorithms against the oracle")
    v.add_argument("query", nargs="?")
    v.add_argument("--random", type=int, default=50, help="number of random instances when no query is given")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--fd-missing", choices=["error", "drop"], default="error")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
