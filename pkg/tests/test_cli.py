from __future__ import annotations

import json

import pytest

from conftest import triangle_trap
from wcoj.cli import main, verify_query
from wcoj.io import save_query


def run(capsys, *argv) -> tuple[int, str, str]:
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_gen_and_join(tmp_path, capsys):
    code, out, _ = run(capsys, "gen", "lwbad", "--n", 3, "--N", 5, "--out", tmp_path)
    assert code == 0
    info = json.loads(out)
    assert info["expected"]["out"] == 7
    for algo in ("generic", "lw", "binary", "brute"):
        code, out, _ = run(capsys, "join", info["query"], "--algo", algo, "--count")
        assert code == 0 and out.strip() == "7"


def test_join_rows_stats_and_trace(tmp_path, capsys):
    q = save_query(tmp_path, triangle_trap(4), "tri")
    stats = tmp_path / "s.json"
    code, out, err = run(capsys, "join", q, "--trace", "--check-bounds", "--stats", stats)
    assert code == 0 and out.splitlines() == ["A\tB\tC"]
    doc = json.loads(stats.read_text())
    assert doc["out_size"] == 0 and doc["bound_report"]["ok"]
    assert all(json.loads(line)["event"] in ("leaf", "split") for line in err.splitlines())
    for algo in ("triangle", "graph"):
        assert run(capsys, "join", q, "--algo", algo, "--count")[1].strip() == "0"
    assert run(capsys, "join", q, "--algo", "binary", "--best", "--count")[1].strip() == "0"
    assert run(capsys, "join", q, "--edge-order", "2,0,1", "--count")[1].strip() == "0"


def test_relaxed_join(tmp_path, capsys):
    code, out, _ = run(capsys, "gen", "relaxlb", "--n", 2, "--N", 3, "--out", tmp_path)
    path = json.loads(out)["query"]
    assert run(capsys, "join", path, "--relax", 1, "--count")[1].strip() == "9"
    assert run(capsys, "join", path, "--relax", 2, "--count")[1].strip() == "12"


def test_string_values_printed(tmp_path, capsys):
    (tmp_path / "r.tsv").write_text("#relation R A B\nann\tbob\ncy\tdee\n")
    (tmp_path / "s.tsv").write_text("#relation S B\nbob\n")
    (tmp_path / "q.json").write_text(json.dumps({"edges": [["A", "B"], ["B"]], "relations": {"0": "r.tsv", "1": "s.tsv"}}))
    code, out, _ = run(capsys, "join", tmp_path / "q.json")
    assert code == 0 and out.splitlines() == ["A\tB", "ann\tbob"]


def test_solve_lp_and_plan(tmp_path, capsys):
    q = save_query(tmp_path, triangle_trap(4), "tri")
    code, out, _ = run(capsys, "solve-lp", q, "--tighten")
    doc = json.loads(out)
    assert code == 0 and doc["x"] == {"R": "1/2", "S": "1/2", "T": "1/2"}
    assert doc["bound"] == pytest.approx(8.0)
    code, out, _ = run(capsys, "plan", q, "--edge-order", "0,1,2", "--ascii")
    assert code == 0 and out.startswith("node k=3 edge=T")


def test_gen_ext(tmp_path, capsys):
    code, out, _ = run(capsys, "gen", "ext", "--N", 7, "--seed", 4, "--out", tmp_path)
    info = json.loads(out)
    assert code == 0
    assert run(capsys, "join", info["query"], "--count")[1].strip() == str(info["expected"]["out"])


def test_bench(tmp_path, capsys):
    csv_path = tmp_path / "b.csv"
    code, out, _ = run(capsys, "bench", "--family", "triangle", "--N", "64,256", "--algos", "generic,binary", "--csv", csv_path)
    assert code == 0 and set(json.loads(out)) == {"generic", "binary"}
    assert csv_path.read_text().startswith("family,N,algo,work,maxIntermediate,outSize,wallMs")


def test_verify(tmp_path, capsys):
    code, out, _ = run(capsys, "verify", "--random", 15, "--seed", 3)
    assert code == 0 and "15 instance(s), 0 with mismatches" in out
    assert all(verify_query(triangle_trap(6)).values())


def test_errors_return_two(tmp_path, capsys):
    code, _, err = run(capsys, "gen", "lwbad", "--N", 6, "--out", tmp_path)
    assert code == 2 and "nearest valid N" in err
    code, _, err = run(capsys, "join", tmp_path / "missing.json")
    assert code == 2
