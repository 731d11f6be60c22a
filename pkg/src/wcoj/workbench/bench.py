"""Benchmark harness: run several join algorithms over an instance family and fit growth slopes."""
from __future__ import annotations

import csv
import json
import math
import multiprocessing as mp
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..generic import join_with_stats
from ..graph import GraphStats, graph_join
from ..lw import LwStats, TriangleStats, lw_join, triangle_query_join
from ..relation import JoinQuery
from .baseline import binary_join_plan
from .generators import Instance, gen_lw_bad_instance, gen_relaxed_lb_instance, gen_triangle_instance

COLUMNS = ["family", "N", "algo", "work", "maxIntermediate", "outSize", "wallMs", "status"]
ALGOS = ("generic", "lw", "triangle", "graph", "binary")


@dataclass
class Cell:
    family: str
    N: int
    algo: str
    work: int | None = None
    maxIntermediate: int | None = None
    outSize: int | None = None
    wallMs: float | None = None
    status: str = "ok"


def make_instance(family: str, N: int, n: int = 3) -> Instance:
    if family == "triangle":
        return gen_triangle_instance(N)
    if family == "lwbad":
        return gen_lw_bad_instance(n, N)
    if family == "relaxlb":
        return gen_relaxed_lb_instance(n, N)
    raise ValueError(f"unknown family {family!r}")


def run_algo(q: JoinQuery, algo: str) -> dict:
    """Run one algorithm; returns work, output size and the largest intermediate (baseline only)."""
    t0 = time.perf_counter()
    max_inter = None
    if algo == "generic":
        out, st = join_with_stats(q)
        work, size = st.work, len(out)
    elif algo == "lw":
        ls = LwStats()
        out = lw_join(q, stats=ls)
        work, size = ls.work, len(out)
    elif algo == "triangle":
        ts = TriangleStats()
        out = triangle_query_join(q, stats=ts)
        work, size = ts.work, len(out)
    elif algo == "graph":
        gs = GraphStats()
        out = graph_join(q, gs)
        work, size = gs.work, len(out)
    elif algo == "binary":
        _, bs = binary_join_plan(q, collect=False)
        work, size, max_inter = bs.work, bs.out_size, bs.max_intermediate
    else:
        raise ValueError(f"unknown algorithm {algo!r}")
    return {"work": work, "outSize": size, "maxIntermediate": max_inter, "wallMs": (time.perf_counter() - t0) * 1000}


def _cell_worker(family: str, N: int, n: int, algo: str, queue) -> None:
    try:
        queue.put(("ok", run_algo(make_instance(family, N, n).query, algo)))
    except Exception as exc:  # reported in the cell, not raised
        queue.put(("error", repr(exc)))


def run_cell(family: str, N: int, algo: str, n: int = 3, timeout: float | None = None) -> Cell:
    cell = Cell(family, N, algo)
    if timeout is None:
        try:
            res = run_algo(make_instance(family, N, n).query, algo)
        except Exception as exc:
            cell.status = f"error: {exc}"
            return cell
    else:
        ctx = mp.get_context("fork")
        queue = ctx.Queue()
        proc = ctx.Process(target=_cell_worker, args=(family, N, n, algo, queue))
        proc.start()
        proc.join(timeout)
        if proc.is_alive():
            proc.terminate()
            proc.join()
            cell.status = "timeout"
            return cell
        status, res = queue.get() if not queue.empty() else ("error", "worker died")
        if status != "ok":
            cell.status = f"error: {res}"
            return cell
    cell.work, cell.outSize, cell.maxIntermediate, cell.wallMs = res["work"], res["outSize"], res["maxIntermediate"], round(res["wallMs"], 3)
    return cell


def fit_slope(ns: Sequence[float], values: Sequence[float]) -> float | None:
    """Least-squares slope of ``log value`` against ``log N``."""
    pts = [(math.log(x), math.log(v)) for x, v in zip(ns, values) if v and v > 0]
    if len(pts) < 2:
        return None
    xs, ys = zip(*pts)
    return float(np.polyfit(xs, ys, 1)[0])


def bench_compare(
    family: str,
    ns: Sequence[int],
    algos: Sequence[str],
    n: int = 3,
    timeout: float | None = None,
    progress: Callable[[Cell], None] | None = None,
) -> dict:
    """Run every algorithm on every size; report cells and per-algorithm work slopes."""
    cells = []
    for N in ns:
        for algo in algos:
            cell = run_cell(family, N, algo, n, timeout)
            cells.append(cell)
            if progress:
                progress(cell)
    slopes = {}
    for algo in algos:
        done = [c for c in cells if c.algo == algo and c.status == "ok"]
        slopes[algo] = fit_slope([c.N for c in done], [c.work for c in done])
    return {"family": family, "n": n, "N": list(ns), "algos": list(algos), "cells": [asdict(c) for c in cells], "slopes": slopes}


def write_report(report: dict, csv_path: str | Path | None = None, json_path: str | Path | None = None) -> None:
    if csv_path:
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=COLUMNS)
            w.writeheader()
            for c in report["cells"]:
                w.writerow({k: ("" if c[k] is None else c[k]) for k in COLUMNS})
    if json_path:
        Path(json_path).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
