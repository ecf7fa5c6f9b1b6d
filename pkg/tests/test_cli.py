import csv
import json
import subprocess
import sys

import pytest

from cubesolve.cli import run_cli
from cubesolve.cubefile import parse_cube

INV = "x [] { }\np [i] { i=0 -> x ; i=1 -> x }\ngoal inv [j] theory=demorgan { j=0 -> p(1) ; j=1 -> p(0) }\n"


@pytest.fixture
def small_dir(tmp_path):
    (tmp_path / "inv.cube").write_text(INV)
    (tmp_path / "hard.cube").write_text(
        "x [] { }\ny [] { }\np [i] { i=0 -> x ; i=1 -> x }\n"
        "goal never [i] theory=cartesian depth=1 expect=unsolved { i=0 -> x ; i=1 -> y }\n"
        "goal bad [i] theory=cartesian depth=1 { i=0 -> x ; i=1 -> y }\n"
        "  solution p(i)\n"
    )
    return tmp_path


def test_solve_inversion(problems_dir, capsys):
    code = run_cli(["solve", str(problems_dir / "inversion.cube"), "--goal", "inv", "--theory", "demorgan"])
    assert code == 0
    assert capsys.readouterr().out.strip() == "inv = λ j → p (~ j)"


def test_entry_point_runs_as_module(problems_dir):
    out = subprocess.run(
        [sys.executable, "-m", "cubesolve.cli", "solve", str(problems_dir / "diagonal.cube")],
        capture_output=True,
        text=True,
    )
    assert out.returncode == 0 and "λ k → s k k" in out.stdout


def test_internal_format_and_stats(problems_dir, capsys):
    assert run_cli(["solve", str(problems_dir / "diagonal.cube"), "--format", "internal", "--stats"]) == 0
    out = capsys.readouterr().out
    assert "diag = s(k, k)" in out and "[contortion depth=0" in out


def test_json_format(problems_dir, capsys):
    assert run_cli(["solve", str(problems_dir / "inversion.cube"), "--goal", "inv", "--format", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report[0]["goal"] == "inv" and report[0]["status"] == "solved"
    assert report[0]["term"] == {"cell": "p", "args": ["~j"]}
    assert set(report[0]["stats"]) == {"method", "depth", "seconds", "unfolded", "csp_branches", "open_sides"}


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "no/such/file.cube"],
        ["solve"],
        ["frobnicate"],
        ["solve", "{tmp}/broken.cube"],
        ["solve", "{tmp}/inv.cube", "--goal", "missing"],
        ["gen-group", "no-such-presentation"],
    ],
)
def test_input_errors_exit_2(argv, small_dir, capsys):
    (small_dir / "broken.cube").write_text("x [] { i=0 -> }\n")
    argv = [a.replace("{tmp}", str(small_dir)) for a in argv]
    assert run_cli(argv) == 2


def test_unsolved_goal_exits_1(small_dir, capsys):
    assert run_cli(["solve", str(small_dir / "hard.cube"), "--goal", "never"]) == 1
    assert "depth-exhausted" in capsys.readouterr().out


def test_expect_unsolved_skipped_unless_all(small_dir, capsys):
    assert run_cli(["solve", str(small_dir / "hard.cube"), "--format", "internal"]) == 1
    out = capsys.readouterr().out
    assert "never" not in out and "bad" in out
    run_cli(["solve", str(small_dir / "hard.cube"), "--all", "--format", "internal"])
    assert "never" in capsys.readouterr().out


def test_check(problems_dir, small_dir, capsys):
    assert run_cli(["check", str(problems_dir / "groups.cube")]) == 0
    assert run_cli(["check", str(small_dir / "hard.cube")]) == 1
    assert "bad: FAILED" in capsys.readouterr().out
    assert run_cli(["check", str(small_dir / "inv.cube")]) == 0
    assert "no inline solutions" in capsys.readouterr().out


def test_bench_writes_csv_and_chart(small_dir, tmp_path, capsys):
    out_csv = tmp_path / "out" / "b.csv"
    out_csv.parent.mkdir()
    chart = tmp_path / "out" / "b.png"
    code = run_cli(["bench", str(small_dir), "--csv", str(out_csv), "--chart", str(chart), "--timeout", "5"])
    rows = list(csv.DictReader(out_csv.open()))
    assert [(r["file"], r["goal"], r["status"], r["as_expected"]) for r in rows] == [
        ("hard.cube", "never", "depth-exhausted", "True"),
        ("hard.cube", "bad", "depth-exhausted", "False"),
        ("inv.cube", "inv", "solved", "True"),
    ]
    assert code == 1
    assert chart.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_parallel_keeps_order(problems_dir, monkeypatch, capsys):
    monkeypatch.setenv("CUBESOLVE_THREADS", "2")
    assert run_cli(["solve", str(problems_dir / "or_connection.cube"), "--format", "internal"]) == 0
    names = [line.split(" = ")[0] for line in capsys.readouterr().out.splitlines()]
    assert names == [g.name for g in parse_cube((problems_dir / "or_connection.cube").read_text()).goals]


def test_gen_group_inline(tmp_path, capsys):
    out = tmp_path / "g.cube"
    code = run_cli(["gen-group", "generators: a, b; relators: a b a^-1 b^-1", "--count", "2", "--seed", "3", "-o", str(out)])
    assert code == 0
    cf = parse_cube(out.read_text())
    assert len(cf.goals) == 2 and all(cf.check_solutions().values())
    assert run_cli(["check", str(out)]) == 0


def test_gen_group_file_to_stdout(problems_dir, capsys):
    assert run_cli(["gen-group", str(problems_dir / "presentations" / "zz.txt"), "--count", "1"]) == 0
    assert "goal eq0" in capsys.readouterr().out
