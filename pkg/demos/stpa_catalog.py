"""
STPA-SafeSec catalog
====================

Load the TE catalog, list the safety/security conflict candidates and
check requirement traceability.
"""

from safesec_cdcl.data import te_catalog
from safesec_cdcl.stpa import identify_conflict_candidates, validate_traceability

catalog = te_catalog()
print(len(catalog.losses), "losses,", len(catalog.hazards), "hazards,",
      len(catalog.threats), "threats")

# %%
# A control action is a conflict candidate when providing it and withholding
# it are both hazardous in the same context.

for candidate in identify_conflict_candidates(catalog):
    print(candidate.describe())

# %%
# Anything not covered by a constraint shows up here.

for line in validate_traceability(catalog).lines():
    print(line)
