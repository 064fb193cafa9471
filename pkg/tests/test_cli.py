import json
import subprocess
import sys
from importlib import resources

import pytest

from iwamod.cli import main, parse_levels

CORPUS = resources.files("iwamod") / "corpus"
FILES = sorted(p.name for p in CORPUS.iterdir() if p.name.endswith(".json"))


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("name", FILES)
def test_corpus_file_passes(name, capsys):
    path = str(CORPUS / name)
    cmd = json.loads((CORPUS / name).read_text())["command"]
    code, out, err = run([cmd, path], capsys)
    assert code == 0, out + err
    assert "--- summary ---" in out


@pytest.mark.parametrize("name", ["pair.json", "parity.json"])
def test_output_is_deterministic(name, capsys):
    path = str(CORPUS / name)
    cmd = json.loads((CORPUS / name).read_text())["command"]
    first = run([cmd, path], capsys)
    second = run([cmd, path], capsys)
    assert first == second


def test_summary_format_is_json(capsys):
    code, out, _ = run(["prepare", str(CORPUS / "prepare.json"), "--format", "summary"], capsys)
    assert code == 0
    assert json.loads(out)["failures"] == []


def test_malformed_json_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"command": "prepare",\n "ring": {"p": 3,}}')
    code, out, err = run(["prepare", str(bad)], capsys)
    assert code == 2
    assert "line 2" in err


def test_bad_field_reports_path(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"ring": {"p": 3, "precision": 6},
                               "modules": [{"kind": "elementary", "factors": [[1, "x"]]}]}))
    code, _, err = run(["prepare", str(bad)], capsys)
    assert code == 2
    assert "modules[0].factors[0][1]" in err


def test_failed_expectation_exits_1(tmp_path, capsys):
    d = tmp_path / "wrong.json"
    d.write_text(json.dumps({"ring": {"p": 3, "precision": 6, "truncation": 16},
                             "modules": [{"kind": "elementary", "factors": [[3, 0, 1]],
                                          "expect": {"mu": 0, "lambda": 3}}]}))
    code, out, _ = run(["prepare", str(d)], capsys)
    assert code == 1


def test_missing_file_exits_2(capsys):
    code, _, _ = run(["adjoint", "/nonexistent/x.json"], capsys)
    assert code == 2


def test_suite_corpus_only(capsys):
    code, out, err = run(["suite", "--corpus-only"], capsys)
    assert code == 0, out + err


def test_parse_levels():
    assert parse_levels("0,2") == [0, 2]
    assert parse_levels("1-3") == [1, 2, 3]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "iwamod", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "suite" in proc.stdout
