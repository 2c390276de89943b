import random

import pytest

from safesec_cdcl.data import read_text, te_catalog, te_scenario
from safesec_cdcl.sat_core import CnfFormula


def random_3cnf(rng: random.Random, max_vars: int = 12, max_clauses: int = 60) -> CnfFormula:
    n = rng.randint(1, max_vars)
    m = rng.randint(1, max_clauses)
    clauses = []
    for _ in range(m):
        k = min(3, n)
        vars_ = rng.sample(range(1, n + 1), k)
        clauses.append([v if rng.random() < 0.5 else -v for v in vars_])
    return CnfFormula.from_ints(clauses, n)


def random_unsat_biased(rng: random.Random, max_vars: int = 10) -> CnfFormula:
    """Clause/variable ratio well above the 3-SAT threshold (~4.26)."""
    n = rng.randint(3, max_vars)
    m = rng.randint(5 * n, 7 * n)
    clauses = []
    for _ in range(m):
        vars_ = rng.sample(range(1, n + 1), 3)
        clauses.append([v if rng.random() < 0.5 else -v for v in vars_])
    return CnfFormula.from_ints(clauses, n)


PSI = CnfFormula.from_ints([[1, 2], [-1, 2]])


def dpll_sat(clauses) -> bool:
    """Plain recursive DPLL over lists of int literals, kept apart from the package."""
    clauses = [set(c) for c in clauses]
    while True:
        if any(not c for c in clauses):
            return False
        unit = next((next(iter(c)) for c in clauses if len(c) == 1), None)
        if unit is None:
            break
        clauses = [c - {-unit} for c in clauses if unit not in c]
    if not clauses:
        return True
    v = next(iter(clauses[0]))
    return any(dpll_sat([c - {-x} for c in clauses if x not in c]) for x in (v, -v))


_criteria: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    number = getattr(item.function, "criterion", None)
    if number is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _criteria[number] = "PASS" if rep.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria, key=int):
        terminalreporter.write_line(f"criterion {number:>2}: {_criteria[number]}")


@pytest.fixture
def psi():
    return PSI


@pytest.fixture(scope="session")
def te():
    return te_scenario()


@pytest.fixture(scope="session")
def te_text():
    return read_text("te_scenario.json")


@pytest.fixture(scope="session")
def catalog():
    return te_catalog()


@pytest.fixture(scope="session")
def catalog_text():
    return read_text("te_catalog.json")
