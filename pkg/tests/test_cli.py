import io
import json
import subprocess
import sys

import pytest

from pegderiv import records
from pegderiv.cli import main
from pegderiv.corpus import EXP_GRAMMAR, LEFT_RECURSIVE, NULLABLE_LEFT_RECURSIVE


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, text in {
        "g1.peg": EXP_GRAMMAR,
        "leftrec.peg": LEFT_RECURSIVE,
        "nullrec.peg": NULLABLE_LEFT_RECURSIVE,
        "broken.peg": "S <- 'a\n",
    }.items():
        p = tmp_path / name
        p.write_text(text)
        paths[name] = str(p)
    paths["dir"] = tmp_path
    return paths


def _stdin(monkeypatch, data: bytes):
    monkeypatch.setattr(sys, "stdin", io.TextIOWrapper(io.BytesIO(data)))


def test_parse_stdin_derivative(files, monkeypatch, capsys):
    _stdin(monkeypatch, b"aacc\n")
    assert main(["parse", "-g", files["g1.peg"], "-e", "derivative", "--stdin"]) == 0
    assert capsys.readouterr().out == "match\n"


def test_parse_keep_newline(files, monkeypatch, capsys):
    _stdin(monkeypatch, b"aacc\n")
    assert main(["parse", "-g", files["g1.peg"], "--stdin", "--keep-newline"]) == 1
    assert capsys.readouterr().out == "fail\n"


@pytest.mark.parametrize("engine", ["naive", "packrat"])
def test_parse_reports_consumed(files, capsys, engine):
    assert main(["parse", "-g", files["g1.peg"], "-e", engine, "aacc"]) == 0
    assert capsys.readouterr().out == "match 4\n"
    assert main(["parse", "-g", files["g1.peg"], "-e", engine, "aab"]) == 1
    assert capsys.readouterr().out == "fail\n"


def test_parse_hex_and_file(files, capsys):
    assert main(["parse", "-g", files["g1.peg"], "--hex", "61 61 63 63"]) == 0
    data = files["dir"] / "input.bin"
    data.write_bytes(b"ab")
    assert main(["parse", "-g", files["g1.peg"], "--file", str(data)]) == 0
    assert main(["parse", "-g", files["g1.peg"], "--hex", "zz"]) == 2
    capsys.readouterr()


def test_parse_leftrec(files, capsys):
    assert main(["parse", "-g", files["leftrec.peg"], "-e", "packrat", "a"]) == 2
    assert "left-recursive: A -> A" in capsys.readouterr().err
    assert main(["parse", "-g", files["leftrec.peg"], "-e", "derivative", "a"]) == 1
    out = capsys.readouterr()
    assert out.out == "fail\n" and "warning" in out.err


def test_parse_usage_errors(files, capsys):
    assert main(["parse", "-g", files["broken.peg"], "a"]) == 2
    assert "1:6" in capsys.readouterr().err
    assert main(["parse", "-g", str(files["dir"] / "missing.peg"), "a"]) == 2
    assert main(["parse", "-g", files["g1.peg"]]) == 2
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


def test_trace_output(files, capsys):
    assert main(["parse", "-g", files["g1.peg"], "--trace", "ac"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert [ln.split(":")[0] for ln in lines[:-1]] == ["step 0 'a'", "step 1 'c'", "step 2 $"]
    assert lines[-1] == "match"
    assert main(["parse", "-g", files["g1.peg"], "-e", "packrat", "--trace", "ac"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert any(ln.startswith("memo store A@0 -> 2") for ln in lines)


def test_metrics_round_trip(files, capsys):
    out = files["dir"] / "m.jsonl"
    assert main(["parse", "-g", files["g1.peg"], "--metrics", str(out), "aacc"]) == 0
    recs = records.read(str(out))
    assert recs[0] == {"type": "header", "format": records.FORMAT, "version": records.VERSION}
    run = recs[1]
    assert run["engine"] == "derivative" and run["verdict"] == "match" and "consumed" not in run
    assert run["grammar_hash"] == records.grammar_hash(EXP_GRAMMAR)
    steps = recs[2:]
    assert len(steps) == 5
    assert all(set(s) == {"type", *records.STEP_FIELDS} for s in steps)
    assert [s["symbol"] for s in steps] == [97, 97, 99, 99, "$"]

    out2 = files["dir"] / "n.jsonl"
    assert main(["parse", "-g", files["g1.peg"], "-e", "naive", "--metrics", str(out2), "aacc"]) == 0
    run = records.read(str(out2))[1]
    assert run["consumed"] == 4 and run["stats"]["nonterminal_invocations"] == 7
    capsys.readouterr()


def test_run_result_consumed_rule():
    with pytest.raises(ValueError):
        records.RunResult("derivative", "match", "x", 1, consumed=1)
    with pytest.raises(ValueError):
        records.RunResult("packrat", "match", "x", 1)


def test_loads_rejects_foreign_documents():
    with pytest.raises(ValueError):
        records.loads('{"type": "run"}\n')
    with pytest.raises(ValueError):
        records.loads(json.dumps({"type": "header", "format": records.FORMAT, "version": 99}))


def test_check(files, capsys):
    assert main(["check", files["g1.peg"]]) == 0
    assert main(["check", files["leftrec.peg"]]) == 1
    assert "left-recursive: A -> A" in capsys.readouterr().out
    assert main(["check", files["nullrec.peg"]]) == 1
    assert main(["check", files["broken.peg"]]) == 2


def test_diff(files, capsys):
    assert main(["diff", "-g", files["g1.peg"], "--exhaustive", "6"]) == 0
    assert "0 with disagreements" in capsys.readouterr().out
    assert main(["diff", "--random", "42", "20", "--exhaustive", "5"]) == 0
    assert main(["diff", "-g", files["broken.peg"]]) == 2
    assert main(["diff", "-g", files["leftrec.peg"]]) == 2
    capsys.readouterr()
    assert main(["diff", "--random", "1", "2", "--exhaustive", "2", "--json"]) == 0
    docs = [json.loads(ln) for ln in capsys.readouterr().out.splitlines()]
    assert len(docs) == 2 and all(d["disagreements"] == [] for d in docs)


def test_bench(files, capsys):
    out = files["dir"] / "rows.jsonl"
    assert main(["bench", "--family", "exp-grammar", "-n", "6..8", "-e", "naive,packrat", "--out", str(out)]) == 0
    rows = [json.loads(ln) for ln in out.read_text().splitlines()]
    assert [r["naive_invocations"] for r in rows if r["engine"] == "naive"] == [127, 255, 511]
    assert main(["bench", "--family", "nope", "-n", "1"]) == 2
    assert main(["bench", "--family", "anbncn", "-n", "x..y"]) == 2
    capsys.readouterr()


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "pegderiv", "check", files["g1.peg"]],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "well-formed" in proc.stdout
