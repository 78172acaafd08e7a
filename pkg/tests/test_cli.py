import csv
import io
import json

import pytest

from nwkmst.cli import main


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def grid_file(tmp_path, capsys):
    path = tmp_path / "g.json"
    assert run(capsys, "gen", "--kind", "grid", "--rows", 3, "--cols", 3,
               "--quota", 5, "--seed", 2, "-o", path)[0] == 0
    return path


def test_gen_kinds(tmp_path, capsys):
    for kind, extra in [("mestre", ["--q", 2]), ("handicap", ["--q", 2, "--gamma", 2])]:
        code, out, _ = run(capsys, "gen", "--kind", kind, *extra)
        assert code == 0 and json.loads(out)["n"] > 0
    sets = tmp_path / "sets.json"
    sets.write_text(json.dumps({"sets": [[1, [0, 1]], [2, [1, 2]]], "n_elements": 3, "target": 2}))
    code, out, _ = run(capsys, "gen", "--kind", "cover", "--sets", sets)
    assert code == 0 and json.loads(out)["quota"] == 2


def test_solve_oracle_verify(grid_file, tmp_path, capsys):
    report = tmp_path / "r.json"
    trace = tmp_path / "t.jsonl"
    code, _, _ = run(capsys, "solve", grid_file, "-o", report, "--trace", trace)
    assert code == 0
    doc = json.loads(report.read_text())
    assert doc["solution"]["profit"] >= 5
    assert all(json.loads(line)["kind"] for line in trace.read_text().splitlines())
    code, out, _ = run(capsys, "oracle", grid_file)
    opt = json.loads(out)
    assert code == 0 and set(opt) >= {"opt_cost", "opt_nodes"}
    assert doc["solution"]["cost"] >= opt["opt_cost"] - 1e-9
    code, out, _ = run(capsys, "verify", grid_file)
    assert code == 0 and "PASS" in out


def test_verify_catches_tampered_report(grid_file, tmp_path, capsys):
    report = tmp_path / "r.json"
    run(capsys, "solve", grid_file, "-o", report)
    doc = json.loads(report.read_text())
    doc["solution"]["nodes"] = [0]
    report.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "verify", grid_file, "--report", report)
    assert code == 2 and "solution_meets_quota: FAIL" in out


def test_verify_lambda_zero_shortcut(tmp_path, capsys):
    path = tmp_path / "zero.json"
    path.write_text(json.dumps({"n": 3, "root": 0, "quota": 2,
                                "nodes": [{"id": 0, "cost": 0, "profit": 1},
                                          {"id": 1, "cost": 0, "profit": 1},
                                          {"id": 2, "cost": 1, "profit": 1}],
                                "edges": [[0, 1], [1, 2]]}))
    code, out, _ = run(capsys, "verify", path, "--verbose")
    assert code == 0 and "exact_chain_ok: PASS" in out


def test_bench(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    code, out, _ = run(capsys, "bench", empty)
    assert code == 0 and out.strip() == "instance,n,quota,epsilon,ratio,lower_bound_kind,millis"
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    for seed in range(3):
        run(capsys, "gen", "--kind", "grid", "--rows", 3, "--cols", 4, "--seed", seed,
            "-o", corpus / f"g{seed}.json")
    run(capsys, "gen", "--kind", "grid", "--rows", 5, "--cols", 5, "-o", corpus / "big.json")
    code, out, _ = run(capsys, "bench", corpus, "--cap", 16)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 4
    kinds = {r["instance"]: r["lower_bound_kind"] for r in rows}
    assert kinds["big.json"] == "dual" and kinds["g0.json"] == "oracle"
    assert all(float(r["ratio"]) >= 1 - 1e-9 for r in rows)


def test_exit_codes(tmp_path, capsys):
    assert run(capsys, "nonsense")[0] == 3
    assert run(capsys, "solve", tmp_path / "missing.json")[0] == 3
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "solve", bad)[0] == 3
    over = tmp_path / "over.json"
    over.write_text(json.dumps({"n": 1, "root": 0, "quota": 2,
                                "nodes": [{"id": 0, "cost": 0, "profit": 1}], "edges": []}))
    assert run(capsys, "solve", over)[0] == 1
    split = tmp_path / "split.json"
    split.write_text(json.dumps({"n": 3, "root": 0, "quota": 3,
                                 "nodes": [{"id": i, "cost": 1, "profit": 1} for i in range(3)],
                                 "edges": [[0, 1]]}))
    assert run(capsys, "solve", split)[0] == 1
    grid = tmp_path / "g.json"
    run(capsys, "gen", "--kind", "grid", "-o", grid)
    assert run(capsys, "solve", grid, "--epsilon", 2)[0] == 3
    assert run(capsys, "gen", "--kind", "handicap", "--q", 3)[0] == 3
