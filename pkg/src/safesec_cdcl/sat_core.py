"""Propositional data model, DIMACS interchange and brute-force oracles.

Variables are 1-indexed integers as in DIMACS. The enumeration oracles
(:func:`brute_force_solve`, :func:`entails`) are deliberately naive and are
what the CDCL engine is tested against.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

__all__ = [
    "Literal",
    "Clause",
    "CnfFormula",
    "Assignment",
    "Evaluation",
    "DimacsError",
    "OracleLimitError",
    "ORACLE_MAX_VARS",
    "parse_dimacs",
    "emit_dimacs",
    "evaluate",
    "brute_force_solve",
    "entails",
]

#: Largest variable count the enumeration oracles accept.
ORACLE_MAX_VARS = 24

#: var -> value; variables absent from the mapping are unassigned.
Assignment = Mapping[int, bool]


class DimacsError(ValueError):
    """Malformed DIMACS input. ``line`` is 1-based, or None at end of input."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class OracleLimitError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class Literal:
    var: int
    polarity: bool = True

    def __post_init__(self):
        if self.var < 1:
            raise ValueError(f"variable index must be >= 1, got {self.var}")

    def __neg__(self) -> "Literal":
        return Literal(self.var, not self.polarity)

    def __int__(self) -> int:
        return self.var if self.polarity else -self.var

    @classmethod
    def from_int(cls, value: int) -> "Literal":
        if value == 0:
            raise ValueError("0 is not a literal")
        return cls(abs(value), value > 0)

    def value_under(self, assignment: Assignment) -> Optional[bool]:
        v = assignment.get(self.var)
        if v is None:
            return None
        return v == self.polarity

    def __str__(self) -> str:
        return str(int(self))


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals. Duplicates are dropped, first occurrence wins."""

    literals: tuple[Literal, ...] = ()

    def __post_init__(self):
        unique = tuple(dict.fromkeys(self.literals))
        object.__setattr__(self, "literals", unique)

    @classmethod
    def of(cls, *ints: int) -> "Clause":
        return cls(tuple(Literal.from_int(i) for i in ints))

    @property
    def tautological(self) -> bool:
        seen = set(self.literals)
        return any(-lit in seen for lit in self.literals)

    @property
    def is_empty(self) -> bool:
        return not self.literals

    def ints(self) -> list[int]:
        return [int(lit) for lit in self.literals]

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self):
        return iter(self.literals)

    def __str__(self) -> str:
        return "(" + " ".join(map(str, self.literals)) + ")"


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int = 0
    clauses: tuple[Clause, ...] = field(default=())

    def __post_init__(self):
        if self.num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        object.__setattr__(self, "clauses", tuple(self.clauses))
        for clause in self.clauses:
            for lit in clause:
                if lit.var > self.num_vars:
                    raise ValueError(
                        f"literal {lit} exceeds num_vars={self.num_vars}")

    @classmethod
    def from_ints(cls, clauses: Iterable[Iterable[int]],
                  num_vars: Optional[int] = None) -> "CnfFormula":
        cls_list = [Clause.of(*c) for c in clauses]
        if num_vars is None:
            num_vars = max((lit.var for c in cls_list for lit in c), default=0)
        return cls(num_vars, tuple(cls_list))

    def with_clauses(self, extra: Iterable[Clause]) -> "CnfFormula":
        return CnfFormula(self.num_vars, self.clauses + tuple(extra))

    def __len__(self) -> int:
        return len(self.clauses)


def parse_dimacs(text: str) -> CnfFormula:
    num_vars = num_clauses = None
    clauses: list[Clause] = []
    pending: list[int] = []
    pending_line = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise DimacsError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"malformed header {line!r}", lineno)
            try:
                num_vars, num_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"malformed header {line!r}", lineno) from None
            if num_vars < 0 or num_clauses < 0:
                raise DimacsError("negative counts in header", lineno)
            continue
        if line.startswith("%"):
            # SATLIB end marker
            break
        if num_vars is None:
            raise DimacsError("clause before header", lineno)
        for tok in line.split():
            try:
                value = int(tok)
            except ValueError:
                raise DimacsError(f"bad token {tok!r}", lineno) from None
            if value == 0:
                clauses.append(Clause.of(*pending))
                pending = []
                pending_line = None
                continue
            if abs(value) > num_vars:
                raise DimacsError(
                    f"literal {value} exceeds declared {num_vars} variables",
                    lineno)
            if pending_line is None:
                pending_line = lineno
            pending.append(value)

    if num_vars is None:
        raise DimacsError("missing 'p cnf' header")
    if pending:
        raise DimacsError("clause not terminated by 0", pending_line)
    if len(clauses) != num_clauses:
        raise DimacsError(
            f"header declares {num_clauses} clauses, found {len(clauses)}")
    return CnfFormula(num_vars, tuple(clauses))


def emit_dimacs(f: CnfFormula) -> str:
    lines = [f"p cnf {f.num_vars} {len(f.clauses)}"]
    for clause in f.clauses:
        lines.append(" ".join(str(i) for i in clause.ints() + [0]))
    return "\n".join(lines) + "\n"


class Evaluation(str, enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNDETERMINED = "undetermined"


def evaluate(f: CnfFormula, a: Assignment) -> Evaluation:
    undetermined = False
    for clause in f.clauses:
        values = [lit.value_under(a) for lit in clause]
        if any(v is True for v in values):
            continue
        if all(v is False for v in values):
            return Evaluation.UNSAT
        undetermined = True
    return Evaluation.UNDETERMINED if undetermined else Evaluation.SAT


# -- enumeration oracles ---------------------------------------------------

_CHUNK_BITS = 16


def _check_guard(n: int) -> None:
    if n > ORACLE_MAX_VARS:
        raise OracleLimitError(
            f"{n} variables exceeds the enumeration limit of {ORACLE_MAX_VARS}")


def _chunks(n: int):
    """Yield (offset, bits) where bits[k, v-1] is the value of var v in row k.

    Row k of the chunk at ``offset`` is assignment number offset + k, whose
    bit v-1 gives variable v.
    """
    total = 1 << n
    step = 1 << min(n, _CHUNK_BITS)
    shifts = np.arange(n, dtype=np.int64)
    for offset in range(0, total, step):
        idx = np.arange(offset, offset + step, dtype=np.int64)
        yield offset, ((idx[:, None] >> shifts) & 1).astype(bool)


def _clause_truth(bits: np.ndarray, clause: Clause) -> np.ndarray:
    out = np.zeros(bits.shape[0], dtype=bool)
    for lit in clause:
        col = bits[:, lit.var - 1]
        out |= col if lit.polarity else ~col
    return out


def _formula_truth(bits: np.ndarray, f: CnfFormula) -> np.ndarray:
    out = np.ones(bits.shape[0], dtype=bool)
    for clause in f.clauses:
        out &= _clause_truth(bits, clause)
    return out


def brute_force_solve(f: CnfFormula) -> Optional[dict[int, bool]]:
    """Return the first model in enumeration order, or None when UNSAT.

    Enumeration order treats variable 1 as the least significant bit, so the
    all-false assignment is tried first.
    """
    _check_guard(f.num_vars)
    if any(c.is_empty for c in f.clauses):
        return None
    for _, bits in _chunks(f.num_vars):
        hits = np.flatnonzero(_formula_truth(bits, f))
        if hits.size:
            row = bits[hits[0]]
            return {v: bool(row[v - 1]) for v in range(1, f.num_vars + 1)}
    return None


def entails(f: CnfFormula, c: Clause) -> bool:
    """True iff every model of ``f`` satisfies ``c``."""
    if c.tautological:
        return True
    n = max([f.num_vars] + [lit.var for lit in c])
    _check_guard(n)
    if any(cl.is_empty for cl in f.clauses):
        return True
    for _, bits in _chunks(n):
        counter = _formula_truth(bits, f) & ~_clause_truth(bits, c)
        if counter.any():
            return False
    return True
