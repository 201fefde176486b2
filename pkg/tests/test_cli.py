import csv
import json

import pytest

from troprank.cli import main, workers
from troprank.independence import DEPENDENT, INDEPENDENT, UNKNOWN
from troprank.report import CaseReport, exit_code, run_case
from troprank.constructions import library_lookup


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_canonical_exits_zero(capsys):
    code, out, _ = run(capsys, "verify", "--library", "canonical", "--m", "4")
    assert code == 0
    rep = json.loads(out)
    assert rep["verdict"] == INDEPENDENT
    assert rep["certificate_status"] == "contradiction"
    assert rep["schema"] == "troprank-report/1"


def test_unknown_verdict_exits_two(capsys):
    code, out, _ = run(capsys, "verify", "--library", "canonical", "--m", "3",
                       "--rules", "C1", "--budget", "3", "--terse")
    assert code == 2
    assert "Unknown" in out


def test_input_errors_exit_one(capsys, tmp_path):
    assert run(capsys, "verify")[0] == 1
    assert run(capsys, "verify", "--library", "nonsense")[0] == 1
    assert run(capsys, "verify", "--library", "canonical", "--rules", "C9")[0] == 1
    assert run(capsys, "verify", "--bogus-flag")[0] == 1
    bad = tmp_path / "bad.tab"
    bad.write_text("1 2\n3 x\n")
    code, _, err = run(capsys, "verify", "--tableau", str(bad))
    assert code == 1 and "line 2" in err


def test_expensive_case_needs_allow_long(capsys):
    code, _, err = run(capsys, "verify", "--library", "rank5")
    assert code == 1 and "--allow-long" in err


def test_dependent_exit_code():
    rep, _ = run_case(library_lookup("canonical", m=2))
    assert exit_code([rep]) == 0
    unknown = CaseReport(**dict(rep.to_json(), verdict=UNKNOWN))
    dep = CaseReport(**dict(rep.to_json(), verdict=DEPENDENT))
    assert exit_code([rep, unknown]) == 2
    assert exit_code([unknown, dep]) == 3
    assert exit_code([]) == 0


def test_report_writes_json_csv_and_figures(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("TROPRANK_THREADS", "1")
    out = tmp_path / "out"
    code, table, _ = run(capsys, "report", "--library", "canonical", "--m", "2", "--out", str(out))
    assert code == 0
    assert "canonical-m2" in table
    data = json.loads((out / "report.json").read_text())
    assert data["cases"][0]["verdict"] == INDEPENDENT
    rows = list(csv.DictReader((out / "report.csv").open()))
    assert rows[0]["case"] == "canonical-m2" and rows[0]["flag"] == ""
    for name in ("summary.png", "bounds-canonical-m2.png"):
        assert (out / name).read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_batch_with_unknown_is_flagged(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("TROPRANK_THREADS", "2")
    batch = tmp_path / "batch.json"
    batch.write_text(json.dumps([{"library": "canonical", "m": 2}, {"r": 2, "s": 1, "m": 3}]))
    code, table, _ = run(capsys, "report", "--batch", str(batch), "--rules", "C1",
                         "--budget", "2", "--no-figures")
    lines = table.strip().splitlines()
    assert len(lines) == 3
    assert code == 2
    assert any(line.rstrip().endswith("!") for line in lines[1:])


def test_empty_batch(capsys, tmp_path):
    batch = tmp_path / "empty.json"
    batch.write_text("[]")
    code, table, _ = run(capsys, "report", "--batch", str(batch), "--out", str(tmp_path / "o"))
    assert code == 0
    assert table.startswith("case")
    assert (tmp_path / "o" / "report.csv").read_text().startswith("case,")


def test_same_seed_same_report():
    case = library_lookup("rank3", rho=1)
    a, _ = run_case(case, seed=4)
    b, _ = run_case(case, seed=4)
    assert a.stable() == b.stable()
    assert CaseReport.from_json(json.loads(a.dumps())).stable() == a.stable()


def test_workers_respect_env(monkeypatch):
    monkeypatch.setenv("TROPRANK_THREADS", "1")
    assert workers() == 1
    monkeypatch.setenv("TROPRANK_THREADS", "many")
    with pytest.raises(Exception):
        workers()


def test_induct_commands(capsys):
    code, out, _ = run(capsys, "induct", "--library", "example", "--op", "r+")
    assert code == 0
    data = json.loads(out)
    assert data["images"][0]["structure"]["separation"]["ok"]
    assert data["images"][0]["parameters"]["r"] == 4
    code, out, _ = run(capsys, "induct", "--library", "canonical", "--m", "2", "--op", "r+",
                       "--count", "2", "--recheck")
    assert code == 0
    assert [e["verdict"] for e in json.loads(out)["images"]] == [INDEPENDENT] * 2
    code, out, _ = run(capsys, "induct", "--derive", "--r", "4", "--s", "3", "--m", "3")
    assert code == 1 and json.loads(out)["sources"] == []


def test_enumerate_and_lengths(capsys, tmp_path):
    code, out, _ = run(capsys, "enumerate", "--r", "2", "--s", "2", "--terse")
    assert code == 0 and json.loads(out)["count"] == 5
    code, out, _ = run(capsys, "lengths", "--r", "3", "--s", "2", "--m", "3")
    assert code == 0
    path = tmp_path / "len.json"
    path.write_text(out)
    code, out, _ = run(capsys, "lengths", "--r", "3", "--s", "2", "--lengths", str(path))
    assert code == 0 and json.loads(out)["admissible"]
    data = json.loads(path.read_text())
    data["bottom"] = ["1/11"] * len(data["bottom"])
    path.write_text(json.dumps(data))
    code, out, _ = run(capsys, "lengths", "--r", "3", "--s", "2", "--lengths", str(path))
    assert code == 1 and not json.loads(out)["admissible"]


def test_verify_with_lengths_override(capsys, tmp_path):
    code, out, _ = run(capsys, "lengths", "--library", "canonical", "--m", "3")
    path = tmp_path / "len.json"
    path.write_text(out)
    code, out, _ = run(capsys, "verify", "--library", "canonical", "--m", "3",
                       "--lengths", str(path), "--terse")
    assert code == 0
    code, _, err = run(capsys, "verify", "--library", "example", "--lengths", str(path))
    assert code == 1 and "g=3" in err
