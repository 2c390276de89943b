"""Command-line entry point.

Exit codes: ``solve``/``graph`` 10 SAT, 20 UNSAT; ``check`` 0 no conflict,
3 conflict; ``stpa`` 0 clean, 4 findings; 1 runtime error; 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import re
import sys
from pathlib import Path
from typing import Optional, Sequence

from .cdcl import Solver, SolverConfig, export_dot
from .encoding import encode, load_scenario
from .report import analyze_all, analyze_case, render_all_json, render_all_text, render_json, render_text
from .sat_core import emit_dimacs, parse_dimacs
from .stpa import identify_conflict_candidates, load_catalog, validate_traceability

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_CONFLICT = 3
EXIT_FINDINGS = 4
EXIT_SAT = 10
EXIT_UNSAT = 20


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write(path: Optional[str], text: str, out) -> None:
    if path is None or path == "-":
        out.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--heuristic", choices=["static", "vsids"], default="static")
    p.add_argument("--restarts", choices=["off", "luby"], default="off")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--random-ties", action="store_true",
                   help="break VSIDS ties at random (seeded)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="safesec-cdcl",
        description="Bounded safety/security conflict analysis with a CDCL SAT solver.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a DIMACS CNF file")
    p.add_argument("dimacs")
    _add_solver_flags(p)
    p.add_argument("--graph", metavar="DOT_PATH",
                   help="write the implication graph at the last conflict")

    p = sub.add_parser("encode", help="encode a scenario case as DIMACS")
    p.add_argument("scenario")
    p.add_argument("--disturbance", required=True)
    p.add_argument("--mode", choices=["strict", "paper"], default="strict")
    p.add_argument("--method", choices=["tseitin", "distributive"], default="tseitin")
    p.add_argument("-o", "--output")

    p = sub.add_parser("check", help="check disturbance cases for bound conflicts")
    p.add_argument("scenario")
    which = p.add_mutually_exclusive_group()
    which.add_argument("--disturbance")
    which.add_argument("--all", action="store_true")
    p.add_argument("--mode", choices=["strict", "paper"], default="strict")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--graph-dir", metavar="DIR")
    _add_solver_flags(p)

    p = sub.add_parser("graph", help="solve with capture and emit the final conflict graph")
    p.add_argument("dimacs")
    p.add_argument("-o", "--output")
    _add_solver_flags(p)

    p = sub.add_parser("stpa", help="check an STPA-SafeSec catalog")
    p.add_argument("catalog")
    p.add_argument("--conflicts", action="store_true")
    p.add_argument("--trace", action="store_true")
    return parser


def _solver_config(args, capture: bool = False) -> SolverConfig:
    return SolverConfig(heuristic=args.heuristic, restarts=args.restarts,
                        seed=args.seed, random_ties=args.random_ties,
                        capture_graphs=capture)


def _cmd_solve(args, out) -> int:
    formula = parse_dimacs(_read(args.dimacs))
    solver = Solver(formula, _solver_config(args, capture=bool(args.graph)))
    result = solver.solve()
    stats = result.stats
    out.write(f"c decisions {stats.decisions} propagations {stats.propagations} "
              f"conflicts {stats.conflicts} learned {stats.learned}\n")
    if args.graph:
        graph = (result.graph_snapshots[-1] if result.graph_snapshots
                 else solver.snapshot_graph())
        Path(args.graph).write_text(export_dot(graph), encoding="utf-8")
    if result.satisfiable:
        out.write("s SATISFIABLE\n")
        values = [v if val else -v for v, val in sorted(result.model.items())]
        out.write("v " + " ".join(map(str, values + [0])) + "\n")
        return EXIT_SAT
    out.write("s UNSATISFIABLE\n")
    return EXIT_UNSAT


def _cmd_graph(args, out) -> int:
    formula = parse_dimacs(_read(args.dimacs))
    solver = Solver(formula, _solver_config(args, capture=True))
    result = solver.solve()
    graph = (result.graph_snapshots[-1] if result.graph_snapshots
             else solver.snapshot_graph())
    _write(args.output, export_dot(graph), out)
    return EXIT_SAT if result.satisfiable else EXIT_UNSAT


def _cmd_encode(args, out) -> int:
    scenario = load_scenario(_read(args.scenario))
    problem = encode(scenario, args.disturbance, args.mode, method=args.method)
    header = [f"c scenario {scenario.name}", f"c disturbance {problem.disturbance}",
              f"c mode {problem.mode}"]
    for sat_var, entry in sorted(problem.var_map.items()):
        label = getattr(entry, "label", None) or f"aux {entry.definition}"
        header.append(f"c var {sat_var} {label}")
    _write(args.output, "\n".join(header) + "\n" + emit_dimacs(problem.formula), out)
    return EXIT_OK


def _safe_filename(id_: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "_", id_).strip("_") or "case"


def _cmd_check(args, out) -> int:
    scenario = load_scenario(_read(args.scenario))
    config = _solver_config(args)
    capture = args.graph_dir is not None
    if args.disturbance is not None:
        reports = [analyze_case(scenario, args.disturbance, args.mode, config,
                                capture_graph=capture)]
    else:
        reports = analyze_all(scenario, args.mode, config, capture_graph=capture)

    if capture:
        gdir = Path(args.graph_dir)
        gdir.mkdir(parents=True, exist_ok=True)
        for r in reports:
            (gdir / f"{_safe_filename(r.disturbance)}.dot").write_text(
                r.graph_dot, encoding="utf-8")
        # DOT goes to files, not into the stdout report
        reports = [dataclasses.replace(r, graph_dot=None) for r in reports]

    if args.disturbance is not None:
        text = render_json(reports[0]) if args.format == "json" else render_text(reports[0])
    else:
        text = render_all_json(reports) if args.format == "json" else render_all_text(reports)
    out.write(text)
    return EXIT_CONFLICT if any(r.conflict for r in reports) else EXIT_OK


def _cmd_stpa(args, out) -> int:
    catalog = load_catalog(_read(args.catalog))
    both = not (args.conflicts or args.trace)
    findings = False
    out.write(f"catalog: {len(catalog.losses)} losses, {len(catalog.hazards)} hazards, "
              f"{len(catalog.control_actions)} control actions, {len(catalog.ucas)} UCAs, "
              f"{len(catalog.threats)} threats, {len(catalog.constraints)} constraints\n")
    if args.conflicts or both:
        candidates = identify_conflict_candidates(catalog)
        out.write(f"conflict candidates: {len(candidates)}\n")
        for c in candidates:
            out.write(f"  {c.describe()}\n")
        findings |= bool(candidates)
    if args.trace or both:
        report = validate_traceability(catalog)
        lines = report.lines()
        out.write(f"traceability findings: {len(lines)}\n")
        for line in lines:
            out.write(f"  {line}\n")
        findings |= not report.clean
    return EXIT_FINDINGS if findings else EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "graph": _cmd_graph,
    "encode": _cmd_encode,
    "check": _cmd_check,
    "stpa": _cmd_stpa,
}


def run(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return _COMMANDS[args.command](args, out)
    except (OSError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        err.write(f"safesec-cdcl {args.command}: error: {msg}\n")
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
