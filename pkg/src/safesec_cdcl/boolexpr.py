"""Boolean expression trees and their conversion to CNF."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Optional, Union

from .sat_core import Clause, CnfFormula

__all__ = [
    "BoolExpr",
    "Var",
    "Not",
    "And",
    "Or",
    "TRUE",
    "FALSE",
    "conj",
    "disj",
    "CnfBudgetError",
    "DEFAULT_CLAUSE_BUDGET",
    "to_cnf",
]

DEFAULT_CLAUSE_BUDGET = 100_000


class _Ops:
    def __invert__(self) -> "Not":
        return Not(self)

    def __and__(self, other: "BoolExpr") -> "And":
        return And((self, other))

    def __or__(self, other: "BoolExpr") -> "Or":
        return Or((self, other))


@dataclass(frozen=True)
class Var(_Ops):
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("variable index must be >= 1")

    def evaluate(self, a: Mapping[int, bool]) -> bool:
        return a[self.index]

    def variables(self) -> frozenset[int]:
        return frozenset([self.index])

    def __str__(self) -> str:
        return f"x{self.index}"


@dataclass(frozen=True)
class Not(_Ops):
    child: "BoolExpr"

    def evaluate(self, a: Mapping[int, bool]) -> bool:
        return not self.child.evaluate(a)

    def variables(self) -> frozenset[int]:
        return self.child.variables()

    def __str__(self) -> str:
        return f"¬{self.child}"


@dataclass(frozen=True)
class And(_Ops):
    """Conjunction; ``And(())`` is the constant true."""

    children: tuple["BoolExpr", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def evaluate(self, a: Mapping[int, bool]) -> bool:
        return all(c.evaluate(a) for c in self.children)

    def variables(self) -> frozenset[int]:
        return frozenset().union(*(c.variables() for c in self.children))

    def __str__(self) -> str:
        if not self.children:
            return "⊤"
        return "(" + " ∧ ".join(map(str, self.children)) + ")"


@dataclass(frozen=True)
class Or(_Ops):
    """Disjunction; ``Or(())`` is the constant false."""

    children: tuple["BoolExpr", ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))

    def evaluate(self, a: Mapping[int, bool]) -> bool:
        return any(c.evaluate(a) for c in self.children)

    def variables(self) -> frozenset[int]:
        return frozenset().union(*(c.variables() for c in self.children))

    def __str__(self) -> str:
        if not self.children:
            return "⊥"
        return "(" + " ∨ ".join(map(str, self.children)) + ")"


BoolExpr = Union[Var, Not, And, Or]

TRUE = And(())
FALSE = Or(())


def conj(*children: BoolExpr) -> BoolExpr:
    """Conjunction that collapses a single child to itself."""
    return children[0] if len(children) == 1 else And(children)


def disj(*children: BoolExpr) -> BoolExpr:
    return children[0] if len(children) == 1 else Or(children)


class CnfBudgetError(ValueError):
    pass


def _as_literal(e: BoolExpr) -> Optional[int]:
    if isinstance(e, Var):
        return e.index
    if isinstance(e, Not):
        inner = _as_literal(e.child)
        return None if inner is None else -inner
    return None


# -- Tseitin -------------------------------------------------------------------

class _Tseitin:
    def __init__(self, first_aux: int):
        self.next_var = first_aux
        self.clauses: list[list[int]] = []
        self.aux: dict[int, BoolExpr] = {}
        self.memo: dict[BoolExpr, int] = {}

    def literal(self, e: BoolExpr) -> int:
        """Literal equivalent to ``e``, defining an auxiliary if needed."""
        lit = _as_literal(e)
        if lit is not None:
            return lit
        if isinstance(e, Not):
            return -self.literal(e.child)
        if e in self.memo:
            return self.memo[e]
        kids = [self.literal(c) for c in e.children]
        x = self.next_var
        self.next_var += 1
        self.aux[x] = e
        self.memo[e] = x
        if isinstance(e, And):
            # x <-> k1 & ... & kn
            self.clauses.append([x] + [-k for k in kids])
            for k in kids:
                self.clauses.append([-x, k])
        else:
            # x <-> k1 | ... | kn
            self.clauses.append([-x] + kids)
            for k in kids:
                self.clauses.append([x, -k])
        return x

    def require(self, e: BoolExpr) -> None:
        if isinstance(e, And):
            for c in e.children:
                self.require(c)
        elif isinstance(e, Or):
            self.clauses.append([self.literal(c) for c in e.children])
        elif isinstance(e, Not) and isinstance(e.child, Or):
            for c in e.child.children:
                self.require(Not(c))
        else:
            self.clauses.append([self.literal(e)])


# -- distributive ----------------------------------------------------------------

def _nnf(e: BoolExpr, negate: bool = False) -> BoolExpr:
    if isinstance(e, Var):
        return Not(e) if negate else e
    if isinstance(e, Not):
        return _nnf(e.child, not negate)
    kids = tuple(_nnf(c, negate) for c in e.children)
    if isinstance(e, And):
        return Or(kids) if negate else And(kids)
    return And(kids) if negate else Or(kids)


def _distribute(e: BoolExpr, budget: int) -> list[frozenset[int]]:
    lit = _as_literal(e)
    if lit is not None:
        return [frozenset([lit])]
    if isinstance(e, And):
        out: list[frozenset[int]] = []
        for c in e.children:
            out.extend(_distribute(c, budget))
            if len(out) > budget:
                raise CnfBudgetError(f"distributive CNF exceeds {budget} clauses")
        return out
    # Or: cross product of children's clause sets
    acc: list[frozenset[int]] = [frozenset()]
    for c in e.children:
        part = _distribute(c, budget)
        if len(acc) * len(part) > budget:
            raise CnfBudgetError(f"distributive CNF exceeds {budget} clauses")
        merged = []
        for x, y in itertools.product(acc, part):
            clause = x | y
            if not any(-l in clause for l in clause):
                merged.append(clause)
        acc = list(dict.fromkeys(merged))
    return acc


def to_cnf(e: BoolExpr, method: str = "tseitin", num_vars: Optional[int] = None,
           budget: int = DEFAULT_CLAUSE_BUDGET) -> tuple[CnfFormula, dict[int, BoolExpr]]:
    """Convert ``e`` to CNF.

    Returns the formula and a map from each auxiliary variable to the
    subexpression it names (always empty for the distributive method).
    ``num_vars`` is the number of original variables; auxiliaries are
    numbered after it.

    ``tseitin`` gives an equisatisfiable formula whose models, projected onto
    the original variables, are exactly the models of ``e``. ``distributive``
    gives a logically equivalent formula with no auxiliaries, or raises
    :class:`CnfBudgetError` when it would exceed ``budget`` clauses.
    """
    base = max(e.variables(), default=0)
    if num_vars is None:
        num_vars = base
    elif num_vars < base:
        raise ValueError(f"expression uses variable {base} > num_vars={num_vars}")

    if method == "tseitin":
        t = _Tseitin(num_vars + 1)
        t.require(e)
        formula = CnfFormula(t.next_var - 1,
                             tuple(Clause.of(*c) for c in t.clauses))
        return formula, dict(t.aux)
    if method == "distributive":
        clauses = list(dict.fromkeys(_distribute(_nnf(e), budget)))
        formula = CnfFormula(num_vars, tuple(
            Clause.of(*sorted(c, key=lambda l: (abs(l), l < 0))) for c in clauses))
        return formula, {}
    raise ValueError(f"unknown CNF method {method!r}")
