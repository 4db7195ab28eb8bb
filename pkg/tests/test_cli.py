import re
import subprocess
import sys

import pytest

from artin_relhyp import cli
from artin_relhyp.coned import VERTEX_CAP_ENV
from artin_relhyp.words import INF


def run(capsys, *argv):
    code = cli.main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def records(out):
    """Parse ``kind k=v ...`` lines into (kind, dict)."""
    rows = []
    for line in out.splitlines():
        kind, *fields = line.split()
        rows.append((kind, dict(f.split("=", 1) for f in fields if "=" in f)))
    return rows


def test_parse_group_file():
    spec = cli.parse_group_file("# comment\nn 3\nm 1 2 7\nm 2 1 7\nm 1 3 inf\n\nm 2 3 8  # trailing\n")
    assert spec.n == 3 and spec.m(1, 2) == 7 and spec.m(1, 3) is INF and spec.m(2, 3) == 8


@pytest.mark.parametrize("text, fragment", [
    ("n 3\nm 1 2 7\nm 2 1 8\n", "line 3: conflicting"),
    ("n 3\nm 1 2 1\n", "line 2"),
    ("m 1 2 7\nn 3\n", "line 1: 'm' line before"),
    ("n 3\nfoo\n", "line 2: unrecognised"),
    ("n 3\nm 1 4 7\n", "out of range"),
    ("# nothing\n", "missing 'n'"),
])
def test_parse_group_file_errors(text, fragment):
    with pytest.raises(cli.GroupFileError, match=fragment):
        cli.parse_group_file(text)


def test_default_group_is_e7():
    spec = cli.load_group(cli.default_group_path())
    assert spec.n == 3 and all(spec.m(i, j) == 7 for i, j in [(1, 2), (1, 3), (2, 3)])


def test_info_and_relator(capsys):
    code, out, _ = run(capsys, "info")
    assert code == 0
    rows = records(out)
    assert rows[0] == ("group", {"n": "3", "finite_pairs": "3", "extra_large": "1",
                                 "theorem_scope": "1", "free": "0"})
    code, out, _ = run(capsys, "relator", "--pair", "1", "2")
    assert code == 0 and "word=a1.a2.a1.a2.a1.a2.a1.a2^-1" in out


def test_wp_and_reduce(capsys):
    code, out, _ = run(capsys, "wp", "a1 a2 a3")
    assert code == 0 and records(out)[0][1]["result"] == "nontrivial"
    code, out, _ = run(capsys, "wp", "a1 a2 a1 a2 a1 a2 a1 a2^-1 a1^-1 a2^-1 a1^-1 a2^-1 a1^-1 a2^-1")
    assert code == 0 and records(out)[0][1]["result"] == "trivial"
    code, out, _ = run(capsys, "wp", "--trace", "a3 a1 a2 a1 a2 a1 a2 a1 a2^-1 a1^-1 a2^-1 a1^-1 a2^-1 a1^-1 a2^-1 a3^-1")
    assert code == 0 and out.splitlines()[-1].startswith("result=trivial")
    code, out, _ = run(capsys, "reduce", "a1 a2 a1")
    assert code == 0 and records(out)[0][1]["reduced"] == "1"


def test_dist_matches_library(capsys):
    code, out, _ = run(capsys, "dist", "a1 a2 a3")
    assert code == 0
    assert records(out)[0][1]["doubled"] == "4"


def test_machine_output_is_byte_identical(capsys):
    argv = ("bigons", "--radius", "2", "--mode", "claim", "--max-quads", "50", "--seed", "3")
    first = run(capsys, *argv)
    second = run(capsys, *argv)
    assert first == second and first[0] == 0


def test_text_and_machine_carry_same_numbers(capsys):
    _, machine, _ = run(capsys, "dist", "a1 a2 a3", "--radius", "2")
    _, text, _ = run(capsys, "dist", "a1 a2 a3", "--radius", "2", "--text")
    assert re.findall(r"\d+", machine) == re.findall(r"\d+", text)


def test_usage_errors(capsys, tmp_path):
    bad = tmp_path / "bad.group"
    bad.write_text("n 3\nm 1 2 7\nm 1 2 9\n")
    code, _, err = run(capsys, "info", "--group", str(bad))
    assert code == 2 and "line 3" in err
    assert run(capsys, "nosuchcommand")[0] == 2
    assert run(capsys, "wp", "b7")[0] == 2
    assert run(capsys, "info", "--group", str(tmp_path / "missing.group"))[0] == 2
    assert run(capsys, "info", "--group", str(bad), "--group", str(bad))[0] == 2
    assert run(capsys, "accept", "--only", "99")[0] == 2


def test_non_extra_large_rejected(capsys, tmp_path):
    g = tmp_path / "a3.group"
    g.write_text("n 3\nm 1 2 3\nm 1 3 7\nm 2 3 7\n")
    assert run(capsys, "wp", "a1", "--group", str(g))[0] == 2
    assert run(capsys, "wp", "a1", "--group", str(g), "--allow-non-extra-large")[0] == 0


def test_pipeline_skip_outside_scope(capsys, tmp_path):
    g = tmp_path / "m5.group"
    g.write_text("n 3\nm 1 2 5\nm 1 3 5\nm 2 3 5\n")
    code, out, _ = run(capsys, "pipeline", "--group", str(g), "--radius", "1")
    assert code == 2 and records(out)[0][0] == "pipeline_skipped"


def test_pipeline_runs(capsys):
    code, out, _ = run(capsys, "pipeline", "--radius", "2", "--samples", "10")
    rows = records(out)
    assert code == 0 and rows[-1] == ("pipeline_summary", {"samples": "10", "failures": "0", "ok": "1"})


def test_resource_cap_exit(capsys, monkeypatch):
    monkeypatch.setenv(VERTEX_CAP_ENV, "5")
    assert run(capsys, "ball", "--radius", "3")[0] == 3


def test_assertion_failure_exit(capsys, monkeypatch):
    monkeypatch.setattr(cli, "BIGON_BOUND", 1)
    code, out, _ = run(capsys, "bigons", "--radius", "2", "--mode", "claim", "--max-quads", "50")
    assert code == 1 and "ok=0" in out.splitlines()[-1]


def test_delta_several_groups(capsys, tmp_path):
    g = tmp_path / "mixed.group"
    g.write_text("n 3\nm 1 2 7\nm 1 3 8\nm 2 3 9\n")
    code, out, _ = run(capsys, "delta", "--radius", "2", "--max-quads", "50",
                       "--group", str(cli.default_group_path()), "--group", str(g))
    rows = records(out)
    assert code == 0 and [r[1].get("spec") for r in rows[:2]] == ["e7", "mixed"]
    assert rows[-1][0] == "delta_summary" and rows[-1][1]["ok"] == "1"


def test_accept_only_8(capsys):
    code, out, _ = run(capsys, "accept", "--only", "8")
    lines = out.splitlines()
    assert code == 0
    assert lines[0].startswith("criterion=8 ") and "status=pass" in lines[0]
    assert lines[-1].startswith("accept_summary criteria=1 failed=0")


def test_console_script_subprocess():
    cmd = [sys.executable, "-m", "artin_relhyp.cli", "geo", "a1 a2", "--radius", "2", "--seed", "1"]
    a = subprocess.run(cmd, capture_output=True)
    b = subprocess.run(cmd, capture_output=True)
    assert a.returncode == 0 and a.stdout == b.stdout and a.stdout
