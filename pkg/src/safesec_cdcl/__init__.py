"""Bounded safety/security conflict analysis with a CDCL SAT solver.

Interval safety limits are encoded as propositional bound literals, pinned
to what a disturbance case observed, and solved; an unsatisfiable problem is
mapped back to the named bounds that were breached. An STPA-SafeSec catalog
model covers the hazard/threat side of the analysis.
"""

from .sat_core import (
    Assignment,
    Clause,
    CnfFormula,
    DimacsError,
    Evaluation,
    Literal,
    brute_force_solve,
    emit_dimacs,
    entails,
    evaluate,
    parse_dimacs,
)
from .cdcl import ImplicationGraph, Solver, SolverConfig, SolveResult, export_dot, solve
from .boolexpr import And, Not, Or, Var, to_cnf
from .encoding import (
    DisturbanceCase,
    Scenario,
    Side,
    build_paper_domain_expr,
    build_safety_expr,
    encode,
    load_scenario,
    make_bound_literals,
    valuate_bounds,
)
from .report import ConflictReport, analyze_all, analyze_case, render_json, render_text
from .stpa import StpaCatalog, identify_conflict_candidates, load_catalog, validate_traceability

__version__ = "0.1.0"
