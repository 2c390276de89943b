import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from safesec_cdcl.sat_core import (
    Clause,
    CnfFormula,
    DimacsError,
    Evaluation,
    Literal,
    OracleLimitError,
    brute_force_solve,
    emit_dimacs,
    entails,
    evaluate,
    parse_dimacs,
)

from conftest import PSI


def all_assignments(n):
    for bits in itertools.product([False, True], repeat=n):
        yield {v + 1: b for v, b in enumerate(bits)}


@st.composite
def formulas(draw, max_vars=8, max_clauses=12):
    n = draw(st.integers(0, max_vars))
    if n == 0:
        return CnfFormula(0, ())
    lit = st.integers(1, n).flatmap(lambda v: st.sampled_from([v, -v]))
    clauses = draw(st.lists(st.lists(lit, max_size=4), max_size=max_clauses))
    return CnfFormula.from_ints(clauses, n)


class TestTypes:
    def test_literal_negation_flips_polarity_only(self):
        a = Literal(3)
        assert -a == Literal(3, False)
        assert -(-a) == a
        assert int(-a) == -3

    def test_literal_rejects_var_zero(self):
        with pytest.raises(ValueError):
            Literal(0)

    def test_clause_dedup_and_tautology(self):
        c = Clause.of(1, 2, 1, -3)
        assert c.ints() == [1, 2, -3]
        assert not c.tautological
        assert Clause.of(1, -1).tautological
        assert Clause().is_empty

    def test_formula_var_bound(self):
        with pytest.raises(ValueError):
            CnfFormula(1, (Clause.of(2),))


class TestDimacs:
    def test_psi(self):
        f = parse_dimacs("p cnf 2 2\n1 2 0\n-1 2 0\n")
        assert f == PSI
        assert [c.ints() for c in f.clauses] == [[1, 2], [-1, 2]]

    def test_empty(self):
        f = parse_dimacs("p cnf 0 0\n")
        assert f.num_vars == 0 and f.clauses == ()

    def test_comment_and_unit(self):
        f = parse_dimacs("c comment\np cnf 1 1\n1 0\n")
        assert f == CnfFormula(1, (Clause.of(1),))

    def test_clause_spanning_lines(self):
        f = parse_dimacs("p cnf 3 1\n1 -2\n3 0\n")
        assert f.clauses[0].ints() == [1, -2, 3]

    @pytest.mark.parametrize("text, line", [
        ("p cnf x 1\n1 0\n", 1),
        ("p dnf 1 1\n1 0\n", 1),
        ("p cnf 2 1\n1 3 0\n", 2),
        ("c hi\np cnf 2 1\n1 2\n", 3),
        ("1 0\n", 1),
    ])
    def test_errors_carry_line(self, text, line):
        with pytest.raises(DimacsError) as info:
            parse_dimacs(text)
        assert info.value.line == line

    def test_clause_count_mismatch(self):
        with pytest.raises(DimacsError, match="declares 2"):
            parse_dimacs("p cnf 1 2\n1 0\n")

    def test_missing_header(self):
        with pytest.raises(DimacsError):
            parse_dimacs("c nothing here\n")

    def test_emit_empty(self):
        assert emit_dimacs(CnfFormula()) == "p cnf 0 0\n"

    def test_emit_header_counts(self):
        f = CnfFormula.from_ints([[1], [-1, 2], [2, 3]])
        assert emit_dimacs(f).splitlines()[0] == "p cnf 3 3"

    @given(formulas())
    def test_round_trip(self, f):
        assert parse_dimacs(emit_dimacs(f)) == f


class TestEvaluate:
    def test_psi_cases(self):
        assert evaluate(PSI, {1: True, 2: False}) is Evaluation.UNSAT
        assert evaluate(PSI, {1: False, 2: True}) is Evaluation.SAT
        assert evaluate(PSI, {1: True}) is Evaluation.UNDETERMINED

    def test_psi_models_by_enumeration(self):
        models = [a for a in all_assignments(2) if evaluate(PSI, a) is Evaluation.SAT]
        assert models == [{1: False, 2: True}, {1: True, 2: True}]

    def test_empty_formula_and_empty_clause(self):
        assert evaluate(CnfFormula(), {}) is Evaluation.SAT
        assert evaluate(CnfFormula(1, (Clause(),)), {1: True}) is Evaluation.UNSAT

    @given(formulas(max_vars=6), st.data())
    def test_monotone(self, f, data):
        n = f.num_vars
        full = {v: data.draw(st.booleans()) for v in range(1, n + 1)}
        keep = data.draw(st.sets(st.integers(1, max(n, 1))))
        partial = {v: b for v, b in full.items() if v in keep}
        before = evaluate(f, partial)
        after = evaluate(f, full)
        if before is not Evaluation.UNDETERMINED:
            assert after is before

    @given(st.lists(st.integers(1, 5), min_size=1, max_size=4), st.data())
    def test_tautology_always_true(self, vars_, data):
        c = Clause.of(*vars_, -vars_[0])
        f = CnfFormula(5, (c,))
        a = {v: data.draw(st.booleans()) for v in range(1, 6)}
        assert evaluate(f, a) is Evaluation.SAT


class TestOracles:
    def test_psi_sat_b_true(self):
        model = brute_force_solve(PSI)
        assert model is not None and model[2] is True

    def test_contradiction(self):
        assert brute_force_solve(CnfFormula.from_ints([[1], [-1]])) is None

    def test_empty_clause(self):
        assert brute_force_solve(CnfFormula(2, (Clause.of(1), Clause()))) is None

    def test_empty_formula_sat(self):
        assert brute_force_solve(CnfFormula()) == {}

    def test_guard(self):
        with pytest.raises(OracleLimitError):
            brute_force_solve(CnfFormula(25, ()))
        with pytest.raises(OracleLimitError):
            entails(CnfFormula(25, ()), Clause.of(1))

    def test_entails(self):
        assert entails(PSI, Clause.of(2))
        assert not entails(PSI, Clause.of(1))
        assert entails(PSI, Clause.of(1, -1))

    @settings(max_examples=60)
    @given(formulas(max_vars=7))
    def test_brute_force_matches_plain_enumeration(self, f):
        models = [a for a in all_assignments(f.num_vars)
                  if evaluate(f, a) is Evaluation.SAT]
        got = brute_force_solve(f)
        if models:
            assert got == models[0] or evaluate(f, got) is Evaluation.SAT
        else:
            assert got is None

    @settings(max_examples=60)
    @given(formulas(max_vars=6), st.lists(st.integers(1, 6).flatmap(
        lambda v: st.sampled_from([v, -v])), max_size=3))
    def test_entails_matches_plain_enumeration(self, f, lits):
        lits = [l for l in lits if abs(l) <= f.num_vars]
        c = Clause.of(*lits)
        expected = all(
            any(lit.value_under(a) for lit in c) or c.tautological
            for a in all_assignments(f.num_vars)
            if evaluate(f, a) is Evaluation.SAT)
        assert entails(f, c) == expected
