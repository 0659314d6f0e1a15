import json

import pytest

from toeplitz_speedup.cli import main


def run(capsys, *argv):
    if "--format" not in argv:
        argv = ("--format", "json") + argv
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_classify_json(capsys):
    code, out, _ = run(capsys, "classify", "chi")
    assert code == 0
    assert json.loads(out)["rules"][0]["constant_length"] == 3


def test_table_format_from_either_position(capsys):
    code, out, _ = run(capsys, "--format", "table", "periods", "chi", "--count", "3")
    assert code == 0 and "27" in out
    code, out2, _ = run(capsys, "periods", "chi", "--count", "3", "--format", "table")
    assert out2 == out


def test_decide_exit_codes(capsys, tmp_path):
    cert = tmp_path / "cert.json"
    code, out, _ = run(capsys, "decide", "new-non-example", "--depth", "3", "--certificate-out", str(cert))
    assert code == 1 and json.loads(out)["outcome"] == "No"
    code, _, _ = run(capsys, "decide", "new-non-example", "--verify", str(cert))
    assert code == 0
    doc = json.loads(cert.read_text())
    doc["certificate"]["bounds"][0] = 23
    cert.write_text(json.dumps(doc))
    code, _, _ = run(capsys, "decide", "new-non-example", "--verify", str(cert))
    assert code == 1
    code, _, _ = run(capsys, "decide", "not-conjugate")
    assert code == 0
    code, _, _ = run(capsys, "decide", "new-non-example", "--depth", "2")
    assert code == 2


def test_input_and_analysis_errors(capsys, tmp_path):
    code, _, err = run(capsys, "classify", str(tmp_path / "nope.json"))
    assert code == 3 and "error" in err
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"alphabets": [["a", "b"]], "rules": [{"level": 1, "map": {"a": "ab"}}]}))
    code, _, err = run(capsys, "classify", str(bad))
    assert code == 3 and "$.rules[0].map.b" in err
    code, _, err = run(capsys, "construct-speedup", "chi", "-c", "3")
    assert code == 4 and "GcdObstruction" in err


def test_recode_constant(capsys):
    code, out, _ = run(capsys, "recode", "constant", "chi", "-c", "2")
    doc = json.loads(out)
    assert code == 0
    assert doc["substitution"] == {"A": "ACB", "B": "ACD", "C": "BCB", "D": "BCD"}
    assert doc["proper_power"] == 2


def test_coboundary_and_conjugacy(capsys):
    assert run(capsys, "coboundary", "chi-worked")[0] == 0
    code, out, _ = run(capsys, "conjugacy", "not-conjugate")
    assert code == 1 and json.loads(out)["outcome"] == "TcNotMinimal"


def test_factor(capsys):
    code, out, _ = run(capsys, "factor", "chi", "chi", "--big-c", "2", "--power", "2",
                       "--check-length", "54")
    assert code == 0
    assert 7 in {c["shift"] for c in json.loads(out)["candidates"]}


def test_construct(capsys):
    code, out, _ = run(capsys, "construct-speedup", "chi", "-c", "2", "--level", "2")
    doc = json.loads(out)
    assert code == 0 and doc["valid"] and doc["minimality"] == "Minimal"


def test_dump_round_trips(capsys, tmp_path):
    code, out, _ = run(capsys, "dump", "chi-worked", "--format", "table")
    path = tmp_path / "again.json"
    path.write_text(out)
    code2, out2, _ = run(capsys, "dump", str(path), "--format", "table")
    assert code == code2 == 0 and out2 == out


@pytest.mark.parametrize("name, extra", [("new-non-example", ("bounds.png", "coincidences.png")),
                                         ("not-conjugate", ("periods.png",))])
def test_report_writes_artifacts_deterministically(capsys, tmp_path, name, extra):
    first, second = tmp_path / "one", tmp_path / "two"
    assert run(capsys, "report", name, "--out", str(first))[0] == 0
    assert run(capsys, "report", name, "--out", str(second))[0] == 0
    files = sorted(p.name for p in first.iterdir())
    for want in ("summary.json", "summary.tsv", "toeplitz.json", "towers.png", "coboundary.json",
                 "conjugacy.json") + extra:
        assert want in files
    for f in files:
        assert (first / f).read_bytes() == (second / f).read_bytes(), f
    summary = json.loads((first / "summary.json").read_text())
    assert sorted(summary["files"] + ["summary.json"]) == files
