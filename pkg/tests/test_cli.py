import csv
import io
import json
import subprocess
import sys

import pytest

from artifact import cli


def run(capsys, *argv):
    code = cli.run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def sl3_file(tmp_path):
    p = tmp_path / "n.json"
    p.write_text(json.dumps([{"1,0": 1, "0,1": 1}, {"1,0": 1, "0,1": 1, "1,1": 5}]))
    return str(p)


def test_limit(capsys, sl3_file):
    code, out, _ = run(capsys, "limit", "--type", "sl3", "--nilpotent", sl3_file)
    assert code == 0
    docs = [json.loads(line) for line in out.splitlines()]
    assert len(docs) == 2
    for d in docs:
        assert d["leading_degree"] == 3 and d["is_quasi_centralizing"]
        assert len(d["basis"]) == 2


def test_limit_needs_input(capsys):
    assert run(capsys, "limit")[0] == cli.EXIT_INPUT


def test_jordan(capsys):
    code, out, _ = run(capsys, "jordan", "--type", "sl3", "--samples", "3")
    doc = json.loads(out)
    assert code == 0 and doc["failures"] == 0 and len(doc["elements"]) == 3


def test_jordan_not_regular(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"1,0": 1}))
    code, _, err = run(capsys, "jordan", "--nilpotent", str(p), "--backend", "exact")
    assert code == cli.EXIT_INVARIANT and "0, 1" in err.replace("(0,1)", "(0, 1)")


def test_qcp(capsys):
    code, out, _ = run(capsys, "qcp", "--type", "sl3", "--samples", "10")
    doc = json.loads(out)
    assert code == 0 and doc["qcp"] and doc["failures"] == 0


def test_qcp_counterexample(capsys):
    code, out, _ = run(capsys, "qcp", "--type", "G2", "--counterexample")
    doc = json.loads(out)
    assert code == 0 and doc["regular"] and doc["qcp"] is False
    assert run(capsys, "qcp", "--type", "sl3", "--counterexample")[0] == cli.EXIT_INPUT


def test_goodfn(capsys):
    code, out, _ = run(capsys, "goodfn", "--lambda", "2", "--delta", "1/2")
    doc = json.loads(out)
    assert code == 0 and doc["valid"] and float(doc["certificate"]["alpha"]) == 0.125
    code, out, _ = run(capsys, "goodfn", "--check", "2", "--balls", "4")
    doc = json.loads(out)
    assert code == 0 and doc["failed"] == 0 and doc["passed"] == 40
    assert run(capsys, "goodfn", "--lambda", "1/2")[0] == cli.EXIT_INPUT


def test_count_csv(capsys):
    code, out, _ = run(capsys, "count", "--tmax", "10", "--tstep", "5", "--threads", "2")
    assert code == 0
    assert out.startswith("T,N,seconds\r\n") and out.endswith("\r\n")
    rows = list(csv.reader(io.StringIO(out, newline="")))
    assert rows[0] == ["T", "N", "seconds"]
    assert [(r[0], r[1]) for r in rows[1:]] == [("5", "1584"), ("10", "13416")]
    assert all(float(r[2]) >= 0 for r in rows[1:])


def test_count_deterministic(capsys, tmp_path):
    argv = ["count", "--tmax", "12", "--tstep", "4", "--no-timing", "--single-pass"]
    outs = []
    for k in ("1", "2", "8"):
        path = tmp_path / f"c{k}.csv"
        assert cli.run(argv + ["--threads", k, "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    assert b",\r\n" in outs[0]


def test_count_rejects_bad_poly(capsys):
    assert run(capsys, "count", "--poly", "0,-1,0", "--tmax", "5")[0] == cli.EXIT_INVARIANT
    assert run(capsys, "count", "--poly", "0,0,-2", "--tmax", "5")[0] == cli.EXIT_INVARIANT
    assert run(capsys, "count", "--poly", "1,2")[0] == cli.EXIT_INPUT


def test_cp(capsys):
    code, out, _ = run(capsys, "cp")
    doc = json.loads(out)
    assert code == 0 and abs(doc["cp_n3"] - 12.5557) < 1e-4 and doc["rel_diff"] < 1e-12
    assert "3.3.49.1" in doc["provenance"]
    code, out, _ = run(capsys, "cp", "--n", "4", "--disc", "1", "--reg", "1", "--h", "1")
    assert code == 0 and json.loads(out)["cp_n3"] is None
    assert run(capsys, "cp", "--reg", "-1")[0] == cli.EXIT_INPUT


def test_psi_check(capsys):
    code, out, _ = run(capsys, "psi-check", "--samples", "5", "--sandwich", "10")
    doc = json.loads(out)
    assert code == 0
    assert doc["round_trip"] == doc["jacobian_one"] == doc["unit_upper_triangular"] == 5
    assert doc["raw_jacobian"] == "30/1"
    assert doc["sandwich"][0]["holds"]


def test_psi_check_singular(capsys):
    assert run(capsys, "psi-check", "--v0", "1,1,-2", "--samples", "1")[0] == cli.EXIT_INVARIANT
    assert run(capsys, "psi-check", "--v0", "a,b")[0] == cli.EXIT_INPUT


def test_bench(capsys):
    code, out, _ = run(capsys, "bench", "--t", "6", "--threads", "1,2")
    rows = list(csv.reader(io.StringIO(out, newline="")))
    assert code == 0 and rows[0] == ["T", "threads", "N", "seconds"]
    assert rows[1][2] == rows[2][2]


def test_usage_errors(capsys):
    assert run(capsys)[0] == cli.EXIT_USAGE
    assert run(capsys, "nosuch")[0] == cli.EXIT_USAGE
    assert run(capsys, "count", "--tmax", "x")[0] == cli.EXIT_USAGE
    assert run(capsys, "limit", "--type", "Z9", "--nilpotent", "x.json")[0] == cli.EXIT_INPUT


def test_bad_json(capsys, tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{nope")
    assert run(capsys, "limit", "--nilpotent", str(p))[0] == cli.EXIT_INPUT
    assert run(capsys, "limit", "--nilpotent", str(tmp_path / "missing.json"))[0] == cli.EXIT_INPUT


@pytest.mark.parametrize("command", ["limit", "jordan", "qcp", "goodfn", "count", "cp",
                                     "psi-check"])
def test_selftests(capsys, command):
    code, out, _ = run(capsys, command, "--selftest")
    assert code == 0 and "FAIL" not in out


@pytest.mark.parametrize("argv", [["qcp", "--samples", "5"], ["jordan", "--samples", "3"],
                                  ["goodfn", "--check", "1", "--balls", "2"],
                                  ["psi-check", "--samples", "3", "--sandwich", "10"]])
def test_byte_deterministic(capsys, argv):
    outs = {run(capsys, *argv)[1] for _ in range(2)}
    assert len(outs) == 1


def test_entry_point():
    res = subprocess.run([sys.executable, "-m", "artifact.cli", "cp"], capture_output=True,
                         text=True, check=True)
    assert json.loads(res.stdout)["rel_diff"] < 1e-12
