"""Interval-bounded constraints and their propositional encoding.

Each monitored variable has a safe interval ``[lo, hi]``. Each side of that
interval becomes one propositional *bound literal* that is true when an
observed interval respects that side. A disturbance case pins every bound
literal to its observed truth value; the pinned problem is handed to the
SAT solver, and UNSAT means the observed behaviour conflicts with the
safety requirement.

Two requirement formulas are supported:

``strict``
    every bound literal must hold.
``paper``
    a named composition of sub-domains, each a disjunction of conjunctions
    of (possibly negated) bound literals, described by a :class:`DomainSpec`.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from typing import Any, Iterator, Mapping, Optional, Union

import jsonschema

from .boolexpr import TRUE, BoolExpr, Var, conj, disj, to_cnf, And, Or, Not
from .sat_core import Clause, CnfFormula, Literal

__all__ = [
    "ScenarioError",
    "Side",
    "Interval",
    "MonitoredVariable",
    "DisturbanceCase",
    "DomainSpec",
    "Scenario",
    "BoundLiteral",
    "BoundMap",
    "AuxiliaryVar",
    "EncodedProblem",
    "parse_number",
    "load_scenario",
    "make_bound_literals",
    "valuate_bounds",
    "build_safety_expr",
    "build_paper_domain_expr",
    "parse_domain_spec",
    "encode",
]


class ScenarioError(ValueError):
    pass


class Side(str, enum.Enum):
    LOWER = "lower"
    UPPER = "upper"


def parse_number(value: Any) -> Fraction:
    """Exact rational from an int, a Decimal, or a decimal string."""
    if isinstance(value, bool):
        raise ScenarioError(f"not a number: {value!r}")
    if isinstance(value, (int, Decimal)):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(Decimal(value.strip()))
        except Exception:
            raise ScenarioError(f"not a decimal number: {value!r}") from None
    if isinstance(value, Fraction):
        return value
    raise ScenarioError(f"not an exact number: {value!r}")


@dataclass(frozen=True)
class Interval:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ScenarioError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def parse(cls, pair: Any) -> "Interval":
        lo, hi = pair
        return cls(parse_number(lo), parse_number(hi))

    def endpoint(self, side: Side) -> Fraction:
        return self.lo if side is Side.LOWER else self.hi

    def respects(self, safe: "Interval", side: Side) -> bool:
        """Non-strict containment on one side."""
        if side is Side.LOWER:
            return self.lo >= safe.lo
        return self.hi <= safe.hi


@dataclass(frozen=True)
class MonitoredVariable:
    name: str
    unit: str
    safe: Interval


@dataclass(frozen=True)
class DisturbanceCase:
    id: str
    observed: Mapping[str, Interval] = field(default_factory=dict)


@dataclass(frozen=True)
class LiteralRef:
    variable: str
    side: Side
    positive: bool = True

    @classmethod
    def parse(cls, text: str) -> "LiteralRef":
        m = re.fullmatch(r"\s*(~?)\s*([^.\s]+)\.(lower|upper)\s*", text)
        if not m:
            raise ScenarioError(
                f"bad literal reference {text!r}; expected '[~]Name.lower|upper'")
        return cls(m.group(2), Side(m.group(3)), not m.group(1))

    def __str__(self) -> str:
        return ("" if self.positive else "~") + f"{self.variable}.{self.side.value}"


# composition trees: a sub-domain name, or ("and"|"or", children), or ("not", child)
Composition = Union[str, tuple]


@dataclass(frozen=True)
class DomainSpec:
    """Sub-domains (each a list of conjunctions) and how they are composed."""

    subdomains: Mapping[str, tuple[tuple[LiteralRef, ...], ...]]
    composition: Composition

    def subdomains_of(self, variable: str, side: Side) -> tuple[str, ...]:
        """Names of the sub-domains mentioning the given bound, in declaration order."""
        return tuple(
            name for name, conjuncts in self.subdomains.items()
            if any(r.variable == variable and r.side is side
                   for conj_ in conjuncts for r in conj_))


def _parse_composition(node: Any) -> Composition:
    if isinstance(node, str):
        return node
    if isinstance(node, dict) and len(node) == 1:
        (op, arg), = node.items()
        if op in ("and", "or") and isinstance(arg, list):
            return (op, tuple(_parse_composition(a) for a in arg))
        if op == "not":
            return ("not", _parse_composition(arg))
    raise ScenarioError(f"bad composition node {node!r}")


def parse_domain_spec(data: Mapping[str, Any]) -> DomainSpec:
    subs = {}
    for name, conjuncts in data["subdomains"].items():
        subs[name] = tuple(tuple(LiteralRef.parse(r) for r in c) for c in conjuncts)
    composition = _parse_composition(data["composition"])
    return DomainSpec(subs, composition)


@dataclass(frozen=True)
class Scenario:
    name: str
    variables: tuple[MonitoredVariable, ...]
    disturbances: tuple[DisturbanceCase, ...] = ()
    domain_spec: Optional[DomainSpec] = None

    def variable(self, name: str) -> MonitoredVariable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)

    def disturbance(self, id: str) -> DisturbanceCase:
        for d in self.disturbances:
            if d.id == id:
                return d
        raise KeyError(f"no disturbance case {id!r} in scenario {self.name!r}")

    def baseline(self, id: str = "baseline") -> DisturbanceCase:
        """A case whose observed intervals equal the safe intervals."""
        return DisturbanceCase(id, {v.name: v.safe for v in self.variables})


_NUMBER = {"anyOf": [{"type": "integer"}, {"type": "string"},
                     {"type": "number"}]}
_PAIR = {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["name", "variables"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string"},
        "variables": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "unit", "safe"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "unit": {"type": "string"},
                    "safe": _PAIR,
                },
            },
        },
        "disturbances": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id", "observed"],
                "additionalProperties": False,
                "properties": {
                    "id": {"type": "string", "minLength": 1},
                    "observed": {"type": "object",
                                 "additionalProperties": _PAIR},
                },
            },
        },
        "domain_spec": {
            "type": "object",
            "required": ["subdomains", "composition"],
            "additionalProperties": False,
            "properties": {
                "subdomains": {
                    "type": "object",
                    "additionalProperties": {
                        "type": "array",
                        "items": {"type": "array",
                                  "items": {"type": "string"}},
                    },
                },
                "composition": {},
            },
        },
    },
}


def _is_number(checker, inst) -> bool:
    return isinstance(inst, (int, float, Decimal)) and not isinstance(inst, bool)


# parse_float=Decimal yields Decimal instances, which jsonschema does not
# count as numbers out of the box
_Validator = jsonschema.validators.extend(
    jsonschema.Draft7Validator,
    type_checker=jsonschema.Draft7Validator.TYPE_CHECKER.redefine("number", _is_number))


def load_scenario(text: str) -> Scenario:
    """Parse and validate scenario JSON. Decimal literals are read exactly."""
    try:
        data = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"invalid JSON: {exc}") from None
    errors = sorted(_Validator(SCENARIO_SCHEMA).iter_errors(data),
                    key=lambda e: list(e.path))
    if errors:
        err = errors[0]
        where = "/".join(map(str, err.path)) or "<root>"
        raise ScenarioError(f"schema violation at {where}: {err.message}")

    variables = []
    names = set()
    for entry in data["variables"]:
        name = entry["name"]
        if name in names:
            raise ScenarioError(f"duplicate variable name {name!r}")
        names.add(name)
        try:
            safe = Interval.parse(entry["safe"])
        except ScenarioError as exc:
            raise ScenarioError(f"variable {name!r}: {exc}") from None
        variables.append(MonitoredVariable(name, entry["unit"], safe))

    disturbances = []
    ids = set()
    for entry in data.get("disturbances", []):
        did = entry["id"]
        if did in ids:
            raise ScenarioError(f"duplicate disturbance id {did!r}")
        ids.add(did)
        observed = {}
        for var, pair in entry["observed"].items():
            if var not in names:
                raise ScenarioError(
                    f"disturbance {did!r} observes unknown variable {var!r}")
            try:
                observed[var] = Interval.parse(pair)
            except ScenarioError as exc:
                raise ScenarioError(f"disturbance {did!r}, {var!r}: {exc}") from None
        disturbances.append(DisturbanceCase(did, observed))

    spec = None
    if "domain_spec" in data:
        spec = parse_domain_spec(data["domain_spec"])
        _check_spec(spec, names)
    return Scenario(data["name"], tuple(variables), tuple(disturbances), spec)


def _check_spec(spec: DomainSpec, names: set) -> None:
    for sub, conjuncts in spec.subdomains.items():
        for c in conjuncts:
            for ref in c:
                if ref.variable not in names:
                    raise ScenarioError(
                        f"domain {sub!r} references unknown literal {ref}")

    def walk(node):
        if isinstance(node, str):
            if node not in spec.subdomains:
                raise ScenarioError(f"composition names unknown sub-domain {node!r}")
        elif node[0] == "not":
            walk(node[1])
        else:
            for child in node[1]:
                walk(child)
    walk(spec.composition)


# -- bound literals ------------------------------------------------------------

@dataclass(frozen=True)
class BoundLiteral:
    variable: str
    side: Side
    sat_var: int

    @property
    def label(self) -> str:
        return f"{self.variable}.{self.side.value}"


class BoundMap:
    """Bijection between (variable, side) pairs and SAT variables."""

    def __init__(self, literals: tuple[BoundLiteral, ...]):
        self.literals = literals
        self._by_key = {(b.variable, b.side): b for b in literals}
        self._by_var = {b.sat_var: b for b in literals}
        if len(self._by_key) != len(literals) or len(self._by_var) != len(literals):
            raise ValueError("bound map is not a bijection")

    def literal(self, variable: str, side: Union[Side, str]) -> BoundLiteral:
        try:
            return self._by_key[(variable, Side(side))]
        except KeyError:
            raise KeyError(f"no bound literal {variable}.{Side(side).value}") from None

    def by_sat_var(self, sat_var: int) -> BoundLiteral:
        return self._by_var[sat_var]

    def __contains__(self, sat_var: int) -> bool:
        return sat_var in self._by_var

    def __len__(self) -> int:
        return len(self.literals)

    def __eq__(self, other) -> bool:
        return isinstance(other, BoundMap) and self.literals == other.literals

    __hash__ = None

    def __iter__(self) -> Iterator[BoundLiteral]:
        return iter(self.literals)

    def names(self) -> dict[int, str]:
        return {b.sat_var: b.label for b in self.literals}


def make_bound_literals(s: Scenario) -> BoundMap:
    lits = []
    for i, v in enumerate(s.variables):
        lits.append(BoundLiteral(v.name, Side.LOWER, 2 * i + 1))
        lits.append(BoundLiteral(v.name, Side.UPPER, 2 * i + 2))
    return BoundMap(tuple(lits))


def _resolve_case(s: Scenario, d: Union[DisturbanceCase, str]) -> DisturbanceCase:
    return s.disturbance(d) if isinstance(d, str) else d


def valuate_bounds(s: Scenario, d: Union[DisturbanceCase, str],
                   bounds: Optional[BoundMap] = None) -> dict[BoundLiteral, bool]:
    """Truth value of every bound literal under a disturbance case.

    Variables the case does not observe count as within bounds.
    """
    d = _resolve_case(s, d)
    bounds = bounds or make_bound_literals(s)
    out = {}
    for b in bounds:
        var = s.variable(b.variable)
        observed = d.observed.get(b.variable)
        out[b] = True if observed is None else observed.respects(var.safe, b.side)
    return out


def build_safety_expr(s: Scenario, bounds: Optional[BoundMap] = None) -> BoolExpr:
    bounds = bounds or make_bound_literals(s)
    if not len(bounds):
        return TRUE
    return conj(*(Var(b.sat_var) for b in bounds))


def build_paper_domain_expr(s: Scenario, spec: Optional[DomainSpec] = None,
                            bounds: Optional[BoundMap] = None) -> BoolExpr:
    spec = spec or s.domain_spec
    if spec is None:
        raise ScenarioError(f"scenario {s.name!r} has no domain spec")
    bounds = bounds or make_bound_literals(s)

    def literal(ref: LiteralRef) -> BoolExpr:
        try:
            b = bounds.literal(ref.variable, ref.side)
        except KeyError:
            raise ScenarioError(f"domain spec references unknown literal {ref}") from None
        return Var(b.sat_var) if ref.positive else Not(Var(b.sat_var))

    def subdomain(name: str) -> BoolExpr:
        if name not in spec.subdomains:
            raise ScenarioError(f"unknown sub-domain {name!r}")
        return disj(*(conj(*(literal(r) for r in c)) for c in spec.subdomains[name]))

    def walk(node: Composition) -> BoolExpr:
        if isinstance(node, str):
            return subdomain(node)
        op, arg = node
        if op == "not":
            return Not(walk(arg))
        kids = tuple(walk(c) for c in arg)
        if not kids:
            return And(()) if op == "and" else Or(())
        return conj(*kids) if op == "and" else disj(*kids)

    return walk(spec.composition)


# -- encoding -------------------------------------------------------------------

@dataclass(frozen=True)
class AuxiliaryVar:
    sat_var: int
    definition: str


@dataclass(frozen=True)
class EncodedProblem:
    formula: CnfFormula
    var_map: Mapping[int, Union[BoundLiteral, AuxiliaryVar]]
    mode: str
    bounds: BoundMap
    valuation: Mapping[BoundLiteral, bool]
    pins: Mapping[int, BoundLiteral]        # clause index -> pinned literal
    disturbance: str

    def names(self) -> dict[int, str]:
        """Display names for the bound-literal SAT variables."""
        return self.bounds.names()


def encode(s: Scenario, d: Union[DisturbanceCase, str], mode: str = "strict",
           method: str = "tseitin", spec: Optional[DomainSpec] = None) -> EncodedProblem:
    """Requirement formula in CNF plus one unit clause pinning each bound literal."""
    d = _resolve_case(s, d)
    bounds = make_bound_literals(s)
    if mode == "strict":
        expr = build_safety_expr(s, bounds)
    elif mode == "paper":
        expr = build_paper_domain_expr(s, spec, bounds)
    else:
        raise ValueError(f"unknown mode {mode!r}")

    cnf, aux = to_cnf(expr, method, num_vars=len(bounds))
    valuation = valuate_bounds(s, d, bounds)
    pins = {}
    pin_clauses = []
    for b, value in valuation.items():
        pins[len(cnf.clauses) + len(pin_clauses)] = b
        pin_clauses.append(Clause((Literal(b.sat_var, value),)))
    formula = cnf.with_clauses(pin_clauses)

    var_map: dict[int, Union[BoundLiteral, AuxiliaryVar]] = {b.sat_var: b for b in bounds}
    for x, sub in sorted(aux.items()):
        var_map[x] = AuxiliaryVar(x, str(sub))
    return EncodedProblem(formula, var_map, mode, bounds, valuation, pins, d.id)
