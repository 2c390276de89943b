"""
Solver walkthrough
==================

Step a small formula through the CDCL solver by hand, then let it run.
"""

from safesec_cdcl import CnfFormula, Solver, SolverConfig, export_dot, solve
from safesec_cdcl.sat_core import Literal

# %%
# The formula psi = (a or b) and (not a or b). Variable 1 is a, 2 is b.

psi = CnfFormula.from_ints([[1, 2], [-1, 2]])
result = solve(psi)
print(result.outcome.value, result.model)

# %%
# Replay a conflict. Deciding b=false forces a=true through the first
# clause, and then the second clause has no true literal left.

s = Solver(psi, SolverConfig(capture_graphs=True))
s.decide(Literal(2, False))
conflict = s.propagate()
for entry in s.entries():
    print(entry)

# %%
# First-UIP analysis learns the unit clause (b) and sends us back to level 0.

learned = s.analyze_conflict(conflict)
print("learned", learned.clause.ints(), "backjump to", learned.backjump_level)
s.backjump(learned.backjump_level, learned)
print("trail after backjump:", [str(e.literal) for e in s.entries()])

# %%
# Unit propagation on alpha = (a or b or c or d) with a, b, c set false.

alpha = CnfFormula.from_ints([[1, 2, 3, 4]])
s = Solver(alpha)
for v in (1, 2, 3):
    s.decide(Literal(v, False))
s.propagate()
graph = s.snapshot_graph()
print(export_dot(graph, {1: "a", 2: "b", 3: "c", 4: "d"}))
