"""Map solver outcomes back to named boundary violations and render them."""

from __future__ import annotations

import dataclasses
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

from .cdcl import SolverConfig, Solver, export_dot
from .encoding import (
    DisturbanceCase,
    DomainSpec,
    Scenario,
    Side,
    encode,
)

__all__ = [
    "SCHEMA_VERSION",
    "ViolatedBound",
    "ConflictReport",
    "containment_violations",
    "analyze_case",
    "analyze_all",
    "render_text",
    "render_json",
    "render_all_text",
    "render_all_json",
    "format_number",
]

SCHEMA_VERSION = 1


def format_number(x: Fraction) -> str:
    """Integers plainly, terminating decimals as decimals, otherwise p/q."""
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    d = x.denominator
    for p in (2, 5):
        while d % p == 0:
            d //= p
    if d != 1:
        return f"{x.numerator}/{x.denominator}"
    digits = 0
    scaled = x
    while scaled.denominator != 1:
        scaled *= 10
        digits += 1
    sign = "-" if scaled < 0 else ""
    s = str(abs(scaled.numerator)).rjust(digits + 1, "0")
    return f"{sign}{s[:-digits]}.{s[-digits:]}"


@dataclass(frozen=True)
class ViolatedBound:
    variable: str
    side: Side
    safe_value: Fraction
    observed_value: Fraction
    disturbance: str
    unit: str = ""
    subdomains: tuple[str, ...] = ()

    def as_dict(self) -> dict:
        out = {
            "variable": self.variable,
            "side": self.side.value,
            "safe_value": format_number(self.safe_value),
            "observed_value": format_number(self.observed_value),
            "unit": self.unit,
            "disturbance": self.disturbance,
        }
        if self.subdomains:
            out["subdomains"] = list(self.subdomains)
        return out


@dataclass(frozen=True)
class ConflictReport:
    scenario: str
    disturbance: str
    mode: str
    outcome: str                       # "conflict" | "no_conflict"
    violations: tuple[ViolatedBound, ...]
    solver_stats: dict = field(default_factory=dict)
    graph_dot: Optional[str] = None

    @property
    def conflict(self) -> bool:
        return self.outcome == "conflict"

    def as_dict(self) -> dict:
        out = {
            "schema_version": SCHEMA_VERSION,
            "scenario": self.scenario,
            "disturbance": self.disturbance,
            "mode": self.mode,
            "outcome": self.outcome,
            "violations": [v.as_dict() for v in self.violations],
            "solver_stats": dict(self.solver_stats),
        }
        if self.graph_dot is not None:
            out["graph_dot"] = self.graph_dot
        return out


def _violation(s: Scenario, d: DisturbanceCase, variable: str, side: Side,
               subdomains: tuple[str, ...] = ()) -> ViolatedBound:
    var = s.variable(variable)
    return ViolatedBound(variable, side, var.safe.endpoint(side),
                         d.observed[variable].endpoint(side), d.id, var.unit,
                         subdomains)


def containment_violations(s: Scenario, d: Union[DisturbanceCase, str]) -> list[ViolatedBound]:
    """Violated bounds by direct interval comparison, with no SAT involved.

    This is the independent check for the solver path in strict mode.
    """
    if isinstance(d, str):
        d = s.disturbance(d)
    out = []
    for var in s.variables:
        observed = d.observed.get(var.name)
        if observed is None:
            continue
        if observed.lo < var.safe.lo:
            out.append(_violation(s, d, var.name, Side.LOWER))
        if observed.hi > var.safe.hi:
            out.append(_violation(s, d, var.name, Side.UPPER))
    return out


def analyze_case(s: Scenario, d: Union[DisturbanceCase, str], mode: str = "strict",
                 solver_config: Optional[SolverConfig] = None,
                 capture_graph: bool = False, method: str = "tseitin",
                 spec: Optional[DomainSpec] = None) -> ConflictReport:
    """Encode one disturbance case, solve it and explain the outcome.

    In strict mode every pinned-false bound literal is a violation. In paper
    mode only the pinned-false literals inside the unsatisfiable core of the
    final level-0 conflict are reported, each tagged with the sub-domains
    that mention it.
    """
    if isinstance(d, str):
        d = s.disturbance(d)
    problem = encode(s, d, mode, method=method, spec=spec)
    config = solver_config or SolverConfig()
    if capture_graph and not config.capture_graphs:
        config = dataclasses.replace(config, capture_graphs=True)
    solver = Solver(problem.formula, config)
    result = solver.solve()

    violations: list[ViolatedBound] = []
    if not result.satisfiable:
        false_pins = [b for b, value in problem.valuation.items() if not value]
        if mode == "paper":
            in_core = {problem.pins[i] for i in result.core if i in problem.pins}
            domain = spec or s.domain_spec
            violations = [
                _violation(s, d, b.variable, b.side,
                           domain.subdomains_of(b.variable, b.side))
                for b in false_pins if b in in_core]
        else:
            violations = [_violation(s, d, b.variable, b.side) for b in false_pins]

    dot = None
    if capture_graph:
        graph = (result.graph_snapshots[-1] if result.graph_snapshots
                 else solver.snapshot_graph())
        dot = export_dot(graph, problem.names())

    return ConflictReport(
        scenario=s.name,
        disturbance=d.id,
        mode=mode,
        outcome="no_conflict" if result.satisfiable else "conflict",
        violations=tuple(violations),
        solver_stats=result.stats.as_dict(),
        graph_dot=dot,
    )


def analyze_all(s: Scenario, mode: str = "strict",
                solver_config: Optional[SolverConfig] = None,
                capture_graph: bool = False, method: str = "tseitin",
                workers: Optional[int] = None) -> list[ConflictReport]:
    """Analyze every disturbance case; results keep declaration order."""
    def run(d):
        return analyze_case(s, d, mode, solver_config, capture_graph, method)

    if workers == 1 or len(s.disturbances) < 2:
        return [run(d) for d in s.disturbances]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, s.disturbances))


def render_text(r: ConflictReport) -> str:
    head = f"{r.scenario} / {r.disturbance} [{r.mode}]: "
    if not r.conflict:
        return head + "NO CONFLICT\n"
    lines = [head + f"CONFLICT ({len(r.violations)} violated bounds)"]
    for v in r.violations:
        where = f" in {', '.join(v.subdomains)}" if v.subdomains else ""
        lines.append(
            f"{v.variable} {v.side.value} bound violated: "
            f"safe {format_number(v.safe_value)}{v.unit}, "
            f"observed {format_number(v.observed_value)}{v.unit} "
            f"under {v.disturbance}{where}")
    return "\n".join(lines) + "\n"


def render_json(r: ConflictReport) -> str:
    return json.dumps(r.as_dict(), indent=2, ensure_ascii=False) + "\n"


def render_all_text(reports: Sequence[ConflictReport]) -> str:
    return "\n".join(render_text(r) for r in reports)


def render_all_json(reports: Sequence[ConflictReport]) -> str:
    conflicts = [r.disturbance for r in reports if r.conflict]
    doc = {
        "schema_version": SCHEMA_VERSION,
        "scenario": reports[0].scenario if reports else None,
        "conflicting_disturbances": conflicts,
        "reports": [r.as_dict() for r in reports],
    }
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"
