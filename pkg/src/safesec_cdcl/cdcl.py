"""Conflict-driven clause learning SAT solver.

The solver keeps two watched literals per clause, learns first-UIP asserting
clauses and backjumps non-chronologically to the second-highest level of the
learned clause. Implication graphs can be captured at every conflict and
exported as DOT.

Internally literals are signed integers (DIMACS style); the public surface
speaks :class:`~safesec_cdcl.sat_core.Literal`.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Mapping, Optional

from .sat_core import Clause, CnfFormula, Literal

__all__ = [
    "SolverConfig",
    "TrailEntry",
    "LearnedClause",
    "GraphNode",
    "GraphEdge",
    "ImplicationGraph",
    "SolveStats",
    "Outcome",
    "SolveResult",
    "Solver",
    "ContractViolation",
    "solve",
    "export_dot",
    "luby",
]


class ContractViolation(RuntimeError):
    """An engine operation was called outside its precondition."""


@dataclass(frozen=True)
class SolverConfig:
    heuristic: str = "static"          # "static" | "vsids"
    restarts: str = "off"              # "off" | "luby"
    capture_graphs: bool = False
    seed: int = 0
    random_ties: bool = False          # vsids only
    phase_saving: bool = True
    vsids_decay: float = 0.95
    vsids_bump: float = 1.0
    luby_base: int = 64

    def __post_init__(self):
        if self.heuristic not in ("static", "vsids"):
            raise ValueError(f"unknown heuristic {self.heuristic!r}")
        if self.restarts not in ("off", "luby"):
            raise ValueError(f"unknown restart mode {self.restarts!r}")
        if not 0.0 < self.vsids_decay <= 1.0:
            raise ValueError("vsids_decay must be in (0, 1]")


@dataclass(frozen=True)
class TrailEntry:
    literal: Literal
    decision_level: int
    antecedent: Optional[int] = None   # clause index; None for decisions

    @property
    def is_decision(self) -> bool:
        return self.antecedent is None


@dataclass(frozen=True)
class LearnedClause:
    clause: Clause
    asserting_literal: Literal
    backjump_level: int


@dataclass(frozen=True)
class GraphNode:
    literal: Literal
    decision_level: int
    position: int                      # trail index
    decision: bool


@dataclass(frozen=True)
class GraphEdge:
    source: Literal
    target: Optional[Literal]          # None is the conflict node
    clause_id: str


@dataclass(frozen=True)
class ImplicationGraph:
    nodes: tuple[GraphNode, ...] = ()
    edges: tuple[GraphEdge, ...] = ()
    conflict_clause: Optional[str] = None

    @property
    def has_conflict(self) -> bool:
        return self.conflict_clause is not None

    def node(self, literal: Literal) -> GraphNode:
        for n in self.nodes:
            if n.literal == literal:
                return n
        raise KeyError(literal)


@dataclass
class SolveStats:
    decisions: int = 0
    propagations: int = 0
    conflicts: int = 0
    learned: int = 0
    restarts: int = 0

    def as_dict(self) -> dict[str, int]:
        return {
            "decisions": self.decisions,
            "propagations": self.propagations,
            "conflicts": self.conflicts,
            "learned": self.learned,
            "restarts": self.restarts,
        }


class Outcome(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"


@dataclass
class SolveResult:
    outcome: Outcome
    model: Optional[dict[int, bool]]
    stats: SolveStats
    graph_snapshots: list[ImplicationGraph] = field(default_factory=list)
    learned_clauses: list[LearnedClause] = field(default_factory=list)
    core: frozenset[int] = frozenset()

    @property
    def satisfiable(self) -> bool:
        return self.outcome is Outcome.SAT


def luby(i: int) -> int:
    """The i-th element (1-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    if i < 1:
        raise ValueError("luby index is 1-based")
    k = 1
    while True:
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        if (1 << (k - 1)) <= i < (1 << k) - 1:
            return luby(i - (1 << (k - 1)) + 1)
        k += 1


class Solver:
    """One CDCL search over one formula. Not reentrant.

    The step operations (:meth:`propagate`, :meth:`decide`,
    :meth:`analyze_conflict`, :meth:`backjump`) are public so that a caller
    can replay a particular search by hand; :meth:`solve` drives them.
    """

    def __init__(self, formula: CnfFormula, config: Optional[SolverConfig] = None):
        self.formula = formula
        self.config = config or SolverConfig()
        n = formula.num_vars
        self.num_vars = n
        self.clauses: list[list[int]] = []
        self.num_original = 0
        self.watches: dict[int, list[int]] = {}
        for v in range(1, n + 1):
            self.watches[v] = []
            self.watches[-v] = []

        self.value: list[Optional[bool]] = [None] * (n + 1)
        self.level: list[int] = [0] * (n + 1)
        self.reason: list[Optional[int]] = [None] * (n + 1)
        self.trail_pos: list[int] = [-1] * (n + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []   # trail index where each level starts
        self.qhead = 0

        self.activity: list[float] = [0.0] * (n + 1)
        self.saved_phase: list[bool] = [False] * (n + 1)
        self.rng = random.Random(self.config.seed)

        self.stats = SolveStats()
        self.snapshots: list[ImplicationGraph] = []
        self.learned: list[LearnedClause] = []
        self.conflict: Optional[int] = None
        self.unsat = False
        self.final_conflict: Optional[int] = None
        # original clause indices each clause was derived from
        self.sources: list[frozenset[int]] = []
        self._level0_src: dict[int, frozenset[int]] = {}

        for clause in formula.clauses:
            self._add_original(clause)

    # -- clause database ---------------------------------------------------

    def _add_original(self, clause: Clause) -> None:
        idx = len(self.clauses)
        lits = clause.ints()
        self.clauses.append(lits)
        self.sources.append(frozenset([idx]))
        self.num_original += 1
        if self.unsat:
            return
        if not lits:
            self.unsat = True
            self.final_conflict = idx
            return
        if clause.tautological:
            return
        if len(lits) == 1:
            lit = lits[0]
            val = self._lit_value(lit)
            if val is False:
                self.unsat = True
                self.final_conflict = idx
                self.conflict = idx
            elif val is None:
                self._assign(lit, idx)
            return
        self.watches[lits[0]].append(idx)
        self.watches[lits[1]].append(idx)

    def clause_id(self, idx: int) -> str:
        if idx < self.num_original:
            return f"C{idx + 1}"
        return f"L{idx - self.num_original + 1}"

    def clause(self, idx: int) -> Clause:
        return Clause.of(*self.clauses[idx])

    # -- assignment primitives ---------------------------------------------

    def _lit_value(self, lit: int) -> Optional[bool]:
        v = self.value[abs(lit)]
        if v is None:
            return None
        return v if lit > 0 else not v

    def _assign(self, lit: int, reason: Optional[int]) -> None:
        var = abs(lit)
        self.value[var] = lit > 0
        self.level[var] = self.current_level
        self.reason[var] = reason
        self.trail_pos[var] = len(self.trail)
        self.trail.append(lit)

    def _cancel_until(self, level: int) -> None:
        if self.current_level <= level:
            return
        start = self.trail_lim[level]
        for lit in reversed(self.trail[start:]):
            var = abs(lit)
            if self.config.phase_saving:
                self.saved_phase[var] = lit > 0
            self.value[var] = None
            self.reason[var] = None
            self.trail_pos[var] = -1
        del self.trail[start:]
        del self.trail_lim[level:]
        self.qhead = min(self.qhead, len(self.trail))
        self.conflict = None

    @property
    def current_level(self) -> int:
        return len(self.trail_lim)

    def entries(self) -> list[TrailEntry]:
        return [
            TrailEntry(Literal.from_int(lit), self.level[abs(lit)],
                       self.reason[abs(lit)])
            for lit in self.trail
        ]

    def assignment(self) -> dict[int, bool]:
        return {v: self.value[v] for v in range(1, self.num_vars + 1)
                if self.value[v] is not None}

    # -- propagation -------------------------------------------------------

    def propagate(self) -> Optional[int]:
        """Unit propagation to fixpoint. Returns a falsified clause index or None."""
        if self.conflict is not None:
            return self.conflict
        while self.qhead < len(self.trail):
            false_lit = -self.trail[self.qhead]
            self.qhead += 1
            watchers = self.watches[false_lit]
            i = j = 0
            while i < len(watchers):
                idx = watchers[i]
                i += 1
                lits = self.clauses[idx]
                if lits[0] == false_lit:
                    lits[0], lits[1] = lits[1], lits[0]
                other = lits[0]
                if self._lit_value(other) is True:
                    watchers[j] = idx
                    j += 1
                    continue
                for k in range(2, len(lits)):
                    if self._lit_value(lits[k]) is not False:
                        lits[1], lits[k] = lits[k], lits[1]
                        self.watches[lits[1]].append(idx)
                        break
                else:
                    watchers[j] = idx
                    j += 1
                    if self._lit_value(other) is False:
                        while i < len(watchers):
                            watchers[j] = watchers[i]
                            i += 1
                            j += 1
                        del watchers[j:]
                        self.conflict = idx
                        return idx
                    self._assign(other, idx)
                    self.stats.propagations += 1
            del watchers[j:]
        return None

    # -- decisions ---------------------------------------------------------

    def _pick_branch_var(self) -> int:
        free = [v for v in range(1, self.num_vars + 1) if self.value[v] is None]
        if self.config.heuristic == "static":
            return free[0]
        best = max(self.activity[v] for v in free)
        tied = [v for v in free if self.activity[v] == best]
        if self.config.random_ties and len(tied) > 1:
            return self.rng.choice(tied)
        return tied[0]

    def decide(self, literal: Optional[Literal] = None) -> Literal:
        """Open a new decision level and assign ``literal`` (or a heuristic pick)."""
        if self.conflict is not None:
            raise ContractViolation("decide called while a conflict is pending")
        if literal is None:
            # forced decisions may replay a trace without propagating between them
            if self.qhead < len(self.trail):
                raise ContractViolation("decide called with pending propagation")
            if all(self.value[v] is not None for v in range(1, self.num_vars + 1)):
                raise ContractViolation("decide called on a total assignment")
            var = self._pick_branch_var()
            lit = var if self.saved_phase[var] else -var
        else:
            lit = int(literal)
            if self.value[abs(lit)] is not None:
                raise ContractViolation(f"variable {abs(lit)} already assigned")
        self.trail_lim.append(len(self.trail))
        self._assign(lit, None)
        self.stats.decisions += 1
        return Literal.from_int(lit)

    # -- conflict analysis -------------------------------------------------

    def _bump(self, var: int) -> None:
        if self.config.heuristic == "vsids":
            self.activity[var] += self.config.vsids_bump

    def _decay(self) -> None:
        if self.config.heuristic == "vsids":
            d = self.config.vsids_decay
            for v in range(1, self.num_vars + 1):
                self.activity[v] *= d

    def _level0_sources(self, var: int) -> frozenset[int]:
        """Original clauses behind a level-0 assignment."""
        if var in self._level0_src:
            return self._level0_src[var]
        stack, out, order = [var], set(), []
        seen = set()
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            order.append(v)
            r = self.reason[v]
            if r is None:
                continue
            out |= self.sources[r]
            for lit in self.clauses[r]:
                u = abs(lit)
                if u != v and u not in seen:
                    stack.append(u)
        result = frozenset(out)
        self._level0_src[var] = result
        return result

    def analyze_conflict(self, conflict: Optional[int] = None) -> LearnedClause:
        """First-UIP analysis of the pending conflict."""
        if conflict is None:
            conflict = self.conflict
        if conflict is None:
            raise ContractViolation("no conflict to analyze")
        if self.current_level == 0:
            raise ContractViolation("conflict at level 0: formula is UNSAT")

        top = self.current_level
        seen = [False] * (self.num_vars + 1)
        learned: list[int] = []
        sources = set(self.sources[conflict])
        counter = 0
        pivot: Optional[int] = None
        clause_idx: Optional[int] = conflict
        index = len(self.trail) - 1

        while True:
            for lit in self.clauses[clause_idx]:
                var = abs(lit)
                if pivot is not None and var == abs(pivot):
                    continue
                if seen[var]:
                    continue
                if self.level[var] == 0:
                    # false at level 0, hence entailed false; resolve away
                    sources |= self._level0_sources(var)
                    continue
                seen[var] = True
                self._bump(var)
                if self.level[var] == top:
                    counter += 1
                else:
                    learned.append(lit)
            while not seen[abs(self.trail[index])]:
                index -= 1
            pivot = self.trail[index]
            index -= 1
            counter -= 1
            if counter == 0:
                break
            clause_idx = self.reason[abs(pivot)]
            sources |= self.sources[clause_idx]

        asserting = -pivot
        # deterministic order: asserting literal, then by descending level, var
        rest = sorted(learned, key=lambda l: (-self.level[abs(l)], abs(l)))
        lits = [asserting] + rest
        backjump = self.level[abs(rest[0])] if rest else 0
        result = LearnedClause(Clause.of(*lits), Literal.from_int(asserting),
                               backjump)
        self._pending_sources = frozenset(sources)
        self._decay()
        return result

    def backjump(self, level: int, learned: Optional[LearnedClause] = None) -> None:
        """Undo every level above ``level``; if given, add and assert ``learned``."""
        if level >= self.current_level:
            raise ContractViolation(
                f"backjump to {level} from level {self.current_level}")
        if level < 0:
            raise ContractViolation("negative backjump level")
        self._cancel_until(level)
        if learned is None:
            return
        lits = learned.clause.ints()
        idx = len(self.clauses)
        self.clauses.append(lits)
        self.sources.append(getattr(self, "_pending_sources", frozenset()))
        self.learned.append(learned)
        self.stats.learned += 1
        if len(lits) >= 2:
            self.watches[lits[0]].append(idx)
            self.watches[lits[1]].append(idx)
        self._assign(lits[0], idx)

    def restart(self) -> None:
        self._cancel_until(0)
        self.stats.restarts += 1

    # -- graphs --------------------------------------------------------------

    def snapshot_graph(self) -> ImplicationGraph:
        nodes = []
        edges = []
        for pos, lit in enumerate(self.trail):
            var = abs(lit)
            r = self.reason[var]
            node_lit = Literal.from_int(lit)
            nodes.append(GraphNode(node_lit, self.level[var], pos, r is None))
            if r is None:
                continue
            cid = self.clause_id(r)
            antecedents = sorted((-q for q in self.clauses[r] if abs(q) != var),
                                 key=lambda q: self.trail_pos[abs(q)])
            for q in antecedents:
                edges.append(GraphEdge(Literal.from_int(q), node_lit, cid))
        conflict_id = None
        if self.conflict is not None:
            conflict_id = self.clause_id(self.conflict)
            lits = sorted((-q for q in self.clauses[self.conflict]),
                          key=lambda q: self.trail_pos[abs(q)])
            for q in lits:
                edges.append(GraphEdge(Literal.from_int(q), None, conflict_id))
        return ImplicationGraph(tuple(nodes), tuple(edges), conflict_id)

    # -- driver --------------------------------------------------------------

    def _model(self) -> dict[int, bool]:
        return {v: bool(self.value[v]) for v in range(1, self.num_vars + 1)}

    def _finish_unsat(self, conflict: Optional[int]) -> SolveResult:
        self.unsat = True
        if conflict is not None:
            self.final_conflict = conflict
        core = set()
        if self.final_conflict is not None:
            core |= self.sources[self.final_conflict]
            for lit in self.clauses[self.final_conflict]:
                if self.value[abs(lit)] is not None:
                    core |= self._level0_sources(abs(lit))
        return SolveResult(Outcome.UNSAT, None, self.stats, self.snapshots,
                           self.learned, frozenset(core))

    def solve(self) -> SolveResult:
        if self.unsat:
            if self.config.capture_graphs and self.conflict is not None:
                self.snapshots.append(self.snapshot_graph())
            if self.conflict is not None:
                self.stats.conflicts += 1
            return self._finish_unsat(self.final_conflict)

        restart_index = 1
        restart_budget = self.config.luby_base * luby(restart_index)
        since_restart = 0
        while True:
            conflict = self.propagate()
            if conflict is not None:
                self.stats.conflicts += 1
                since_restart += 1
                if self.config.capture_graphs:
                    self.snapshots.append(self.snapshot_graph())
                if self.current_level == 0:
                    return self._finish_unsat(conflict)
                learned = self.analyze_conflict(conflict)
                self.backjump(learned.backjump_level, learned)
                if self.config.restarts == "luby" and since_restart >= restart_budget:
                    if self.current_level > 0:
                        self.restart()
                    restart_index += 1
                    restart_budget = self.config.luby_base * luby(restart_index)
                    since_restart = 0
                continue
            if len(self.trail) == self.num_vars:
                return SolveResult(Outcome.SAT, self._model(), self.stats,
                                   self.snapshots, self.learned)
            self.decide()


def solve(f: CnfFormula, config: Optional[SolverConfig] = None) -> SolveResult:
    return Solver(f, config).solve()


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def _literal_label(lit: Literal, names: Optional[Mapping[int, str]]) -> str:
    if names and lit.var in names:
        base = names[lit.var]
        return base if lit.polarity else "¬" + base
    return str(int(lit))


def export_dot(g: ImplicationGraph, names: Optional[Mapping[int, str]] = None,
               graph_name: str = "G") -> str:
    """Render an implication graph as a DOT digraph.

    Nodes are emitted in trail order and labelled ``lit@level``; the conflict
    node is labelled ``⊥``. ``names`` optionally maps variables to display
    names.
    """
    lines = [f"digraph {graph_name} {{"]
    ids = {}
    for node in sorted(g.nodes, key=lambda n: n.position):
        nid = f"n{node.position}"
        ids[node.literal] = nid
        label = f"{_literal_label(node.literal, names)}@{node.decision_level}"
        shape = ', shape=box' if node.decision else ""
        lines.append(f'  {nid} [label="{_dot_escape(label)}"{shape}];')
    if g.has_conflict:
        lines.append('  conflict [label="⊥", color=red];')
    for edge in g.edges:
        src = ids[edge.source]
        dst = "conflict" if edge.target is None else ids[edge.target]
        lines.append(f'  {src} -> {dst} [label="{_dot_escape(edge.clause_id)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
