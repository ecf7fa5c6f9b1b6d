"""Command-line driver: ``cubesolve solve|check|bench|gen-group``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .agda import check_agda_syntax, print_agda
from .cube import App, Cell, check, show_cell
from .cubefile import CubeFile, Goal, parse_cube
from .dims import Theory, show_dim
from .errors import CubeError, DepthExhausted, Timeout, Unsolvable
from .kan import DEFAULT_MAX_DEPTH, DEFAULT_TIMEOUT, solve

log = logging.getLogger(__name__)

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
SOLVED = "solved"


@dataclass
class Outcome:
    goal: str
    status: str
    cell: Optional[Cell] = None
    method: str = ""
    depth: int = 0
    seconds: float = 0.0
    unfolded: int = 0
    csp_branches: int = 0
    open_sides: tuple = ()
    message: str = ""


def cell_to_json(t: Cell):
    if isinstance(t, App):
        return {"cell": t.name, "args": [show_dim(a) for a in t.args]}
    return {
        "fill": {"from": t.src, "to": show_dim(t.tgt), "bound": t.bound},
        "faces": [{"var": f.var, "end": f.end, "body": cell_to_json(f.body)} for f in t.faces],
        "base": cell_to_json(t.base),
    }


def _settings(goal: Goal, theory, depth, timeout):
    th = Theory.parse(theory) if theory else goal.theory
    d = depth if depth is not None else goal.config.get("depth", DEFAULT_MAX_DEPTH)
    to = timeout if timeout is not None else goal.config.get("timeout", DEFAULT_TIMEOUT)
    return th, d, to


def run_goal(cf: CubeFile, goal: Goal, theory=None, depth=None, timeout=None) -> Outcome:
    th, d, to = _settings(goal, theory, depth, timeout)
    start = time.monotonic()
    try:
        r = solve(cf.context, goal.psi, goal.faces, theory=th, max_depth=d, timeout=to)
    except Timeout:
        return Outcome(goal.name, "timeout", seconds=time.monotonic() - start)
    except DepthExhausted:
        return Outcome(goal.name, "depth-exhausted", seconds=time.monotonic() - start)
    except Unsolvable as e:
        return Outcome(goal.name, "unsolvable", seconds=time.monotonic() - start, message=str(e))
    return Outcome(
        goal.name, SOLVED, r.cell, r.method, r.depth, r.seconds, r.unfolded, r.csp_branches, r.open_sides
    )


def _run_from_text(args):
    text, name, theory, depth, timeout = args
    cf = parse_cube(text)
    return run_goal(cf, cf.goal(name), theory, depth, timeout)


def threads() -> int:
    try:
        return max(1, int(os.environ.get("CUBESOLVE_THREADS", "1")))
    except ValueError:
        return 1


def run_goals(text: str, cf: CubeFile, goals, theory=None, depth=None, timeout=None) -> list[Outcome]:
    """Solve goals, in parallel when CUBESOLVE_THREADS > 1; results keep goal order."""
    jobs = [(text, g.name, theory, depth, timeout) for g in goals]
    n = threads()
    if n == 1 or len(jobs) <= 1:
        return [run_goal(cf, g, theory, depth, timeout) for g in goals]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(_run_from_text, jobs))


def _render(cf: CubeFile, goal: Goal, o: Outcome, fmt: str) -> str:
    if fmt == "agda":
        text = print_agda(cf.context, goal.psi, o.cell, goal.faces, goal.name)
        check_agda_syntax(text, cf.context.names())
        return text
    return f"{goal.name} = {show_cell(o.cell)}"


def _stats(o: Outcome) -> str:
    sides = ",".join(_side(s) for s in o.open_sides) or "-"
    return (
        f"  [{o.method} depth={o.depth} time={o.seconds:.3f}s unfolded={o.unfolded} "
        f"csp_branches={o.csp_branches} open={sides}]"
    )


def _side(s) -> str:
    var, end = s
    return "back" if var is None else f"{var}{end}"


def _read(path: str) -> tuple[str, CubeFile]:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return text, parse_cube(text)


def cmd_solve(a) -> int:
    text, cf = _read(a.file)
    goals = [cf.goal(a.goal)] if a.goal else [g for g in cf.goals if a.all or g.expect == SOLVED]
    outcomes = run_goals(text, cf, goals, a.theory, a.depth, a.timeout)
    if a.format == "json":
        report = []
        for g, o in zip(goals, outcomes):
            entry = {"goal": g.name, "status": o.status}
            if o.cell is not None:
                entry["term"] = cell_to_json(o.cell)
                entry["text"] = show_cell(o.cell)
            entry["stats"] = {
                "method": o.method,
                "depth": o.depth,
                "seconds": round(o.seconds, 4),
                "unfolded": o.unfolded,
                "csp_branches": o.csp_branches,
                "open_sides": [_side(s) for s in o.open_sides],
            }
            report.append(entry)
        print(json.dumps(report, indent=2))
    else:
        for g, o in zip(goals, outcomes):
            if o.status == SOLVED:
                print(_render(cf, g, o, a.format))
                if a.stats:
                    print(_stats(o))
            else:
                print(f"{g.name}: {o.status} after {o.seconds:.2f}s")
    return EXIT_OK if all(o.status == SOLVED for o in outcomes) else EXIT_FAIL


def cmd_check(a) -> int:
    _, cf = _read(a.file)
    bad = 0
    checked = 0
    for g in cf.goals:
        if g.solution is None:
            continue
        checked += 1
        try:
            check(cf.context, g.psi, g.solution, g.faces)
            print(f"{g.name}: ok")
        except CubeError as e:
            bad += 1
            print(f"{g.name}: FAILED {e}")
    if not checked:
        print("no inline solutions to check")
    return EXIT_OK if bad == 0 else EXIT_FAIL


BENCH_FIELDS = [
    "file", "goal", "expected", "status", "as_expected", "method", "depth",
    "seconds", "unfolded", "csp_branches", "open_sides",
]


def run_bench(directory, theory=None, depth=None, timeout=None) -> list[dict]:
    rows = []
    for path in sorted(Path(directory).glob("*.cube")):
        text = path.read_text(encoding="utf-8")
        cf = parse_cube(text)
        for g, o in zip(cf.goals, run_goals(text, cf, cf.goals, theory, depth, timeout)):
            ok = (o.status == SOLVED) == (g.expect == SOLVED)
            rows.append(
                {
                    "file": path.name,
                    "goal": g.name,
                    "expected": g.expect,
                    "status": o.status,
                    "as_expected": ok,
                    "method": o.method,
                    "depth": o.depth,
                    "seconds": round(o.seconds, 4),
                    "unfolded": o.unfolded,
                    "csp_branches": o.csp_branches,
                    "open_sides": " ".join(_side(s) for s in o.open_sides),
                }
            )
    return rows


def write_csv(rows, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=BENCH_FIELDS)
        w.writeheader()
        w.writerows(rows)


def write_chart(rows, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    labels = [f"{r['file'][:-5]}:{r['goal']}" for r in rows]
    secs = [r["seconds"] for r in rows]
    colors = ["tab:green" if r["status"] == SOLVED else "tab:red" for r in rows]
    fig, ax = plt.subplots(figsize=(max(6, 0.45 * len(rows)), 4.5))
    ax.bar(range(len(rows)), secs, color=colors)
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, rotation=70, ha="right", fontsize=7)
    ax.set_ylabel("seconds")
    ax.set_title("solve time per goal (red: not solved)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def cmd_bench(a) -> int:
    rows = run_bench(a.dir, a.theory, a.depth, a.timeout)
    width = max([len(f"{r['file']}:{r['goal']}") for r in rows] + [4])
    print(f"{'goal':<{width}}  {'status':<16} {'expected':<9} {'seconds':>8}")
    for r in rows:
        name = f"{r['file']}:{r['goal']}"
        mark = "" if r["as_expected"] else "  <- unexpected"
        print(f"{name:<{width}}  {r['status']:<16} {r['expected']:<9} {r['seconds']:>8.3f}{mark}")
    write_csv(rows, a.csv)
    write_chart(rows, a.chart)
    print(f"wrote {a.csv} and {a.chart}")
    return EXIT_OK if all(r["as_expected"] for r in rows) else EXIT_FAIL


def cmd_gen_group(a) -> int:
    from . import groups

    src = Path(a.presentation)
    text = src.read_text(encoding="utf-8") if src.exists() else a.presentation
    if not src.exists() and ":" not in text:
        raise FileNotFoundError(a.presentation)
    p = groups.convenientize(groups.parse_presentation(text))
    problems = groups.random_problems(p, count=a.count, seed=a.seed, size=a.size)
    out = groups.emit_cube(p, problems, timeout=a.goal_timeout)
    if a.output:
        Path(a.output).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cubesolve", description="Solve boundary problems in cubical cell contexts.")
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    def solver_flags(p):
        p.add_argument("--theory", choices=[t.name.lower() for t in Theory])
        p.add_argument("--depth", type=int)
        p.add_argument("--timeout", type=float)

    s = sub.add_parser("solve", help="solve the goals of a .cube file")
    s.add_argument("file")
    s.add_argument("--goal")
    solver_flags(s)
    s.add_argument("--all", action="store_true", help="also run goals marked expect=unsolved")
    s.add_argument("--stats", action="store_true")
    s.add_argument("--format", choices=["agda", "internal", "json"], default="agda")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="verify the inline solutions of a .cube file")
    c.add_argument("file")
    c.set_defaults(func=cmd_check)

    b = sub.add_parser("bench", help="run every .cube file in a directory")
    b.add_argument("dir")
    solver_flags(b)
    b.add_argument("--csv", default="bench.csv")
    b.add_argument("--chart", default="bench.png")
    b.set_defaults(func=cmd_bench)

    g = sub.add_parser("gen-group", help="emit word problems of a group presentation as a .cube file")
    g.add_argument("presentation", help="presentation file or inline text")
    g.add_argument("--count", type=int, default=5)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--size", type=int, default=2)
    g.add_argument("--goal-timeout", type=float, default=10.0)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen_group)
    return ap


def run_cli(argv=None) -> int:
    ap = build_parser()
    try:
        a = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if a.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return a.func(a)
    except (OSError, CubeError, ValueError) as e:
        print(f"cubesolve: error: {e}", file=sys.stderr)
        return EXIT_INPUT


def main():
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
