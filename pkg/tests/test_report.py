import json
from fractions import Fraction

import pytest

from safesec_cdcl.cdcl import SolverConfig
from safesec_cdcl.encoding import (
    DisturbanceCase,
    DomainSpec,
    Interval,
    LiteralRef,
    MonitoredVariable,
    Scenario,
    Side,
)
from safesec_cdcl.report import (
    analyze_all,
    analyze_case,
    containment_violations,
    format_number,
    render_all_json,
    render_json,
    render_text,
)

L, U = "lower", "upper"

# worked out by hand from the safe and observed intervals of each case
EXPECTED = {
    "IDV(1)": {
        ("FeedA", U), ("FeedC", L), ("ReactorPressure", L), ("StripperLevel", L),
        ("StripperLevel", U), ("ReactorLevel", U), ("Price", L), ("Price", U),
    },
    "IDV(11)": {
        ("FeedA", U), ("FeedC", L), ("FeedE", U), ("ProductG", U), ("ProductH", L),
        ("ReactorPressure", L), ("StripperLevel", L), ("ReactorLevel", U),
        ("Quality", U), ("Price", L), ("Price", U), ("Production", L),
    },
    "IDV(13)": {
        ("FeedA", L), ("FeedA", U), ("FeedC", U), ("FeedE", U), ("ProductG", U),
        ("ProductH", L), ("ReactorPressure", L), ("StripperLevel", L),
        ("StripperLevel", U), ("ReactorLevel", U), ("Quality", L), ("Quality", U),
        ("Price", L), ("Price", U), ("Production", L),
    },
}


def keyset(violations):
    return {(v.variable, v.side.value) for v in violations}


def raw_oracle(te_text, idv):
    """Containment straight from the JSON, with no package types involved."""
    data = json.loads(te_text)
    safe = {v["name"]: [Fraction(str(x)) for x in v["safe"]] for v in data["variables"]}
    case = next(d for d in data["disturbances"] if d["id"] == idv)
    out = set()
    for name, (lo, hi) in case["observed"].items():
        lo, hi = Fraction(str(lo)), Fraction(str(hi))
        if lo < safe[name][0]:
            out.add((name, L))
        if hi > safe[name][1]:
            out.add((name, U))
    return out


@pytest.mark.parametrize("idv", sorted(EXPECTED))
class TestStrict:
    def test_frozen_set(self, te, idv):
        r = analyze_case(te, idv)
        assert r.conflict and keyset(r.violations) == EXPECTED[idv]

    def test_agrees_with_oracles(self, te, te_text, idv):
        assert keyset(containment_violations(te, idv)) == raw_oracle(te_text, idv)
        assert keyset(analyze_case(te, idv).violations) == raw_oracle(te_text, idv)

    def test_headline_feed_a_upper(self, te, idv):
        assert ("FeedA", U) in keyset(analyze_case(te, idv).violations)

    def test_heuristics_do_not_change_report(self, te, idv):
        base = analyze_case(te, idv).violations
        for cfg in (SolverConfig(heuristic="vsids"), SolverConfig(restarts="luby")):
            assert analyze_case(te, idv, solver_config=cfg).violations == base

    def test_breach_direction(self, te, idv):
        for v in analyze_case(te, idv).violations:
            if v.side is Side.LOWER:
                assert v.observed_value < v.safe_value
            else:
                assert v.observed_value > v.safe_value


def test_counts(te):
    assert [len(EXPECTED[k]) for k in ("IDV(1)", "IDV(11)", "IDV(13)")] == [8, 12, 15]


def test_baseline_no_conflict(te):
    r = analyze_case(te, te.baseline())
    assert r.outcome == "no_conflict" and r.violations == ()
    assert "NO CONFLICT" in render_text(r)
    assert json.loads(render_json(r))["violations"] == []


def test_idv13_feed_a_both_sides(te):
    r = analyze_case(te, "IDV(13)")
    feed_a = [v for v in r.violations if v.variable == "FeedA"]
    assert [(v.side, v.observed_value) for v in feed_a] == [
        (Side.LOWER, Fraction(10)), (Side.UPPER, Fraction(45))]


class TestText:
    def test_feed_a_line(self, te):
        text = render_text(analyze_case(te, "IDV(1)"))
        line = next(l for l in text.splitlines() if l.startswith("FeedA upper"))
        assert "30" in line and "100" in line and "IDV(1)" in line

    def test_order_is_declaration_order(self, te):
        r = analyze_case(te, "IDV(13)")
        names = [v.name for v in te.variables]
        order = [(names.index(v.variable), v.side is Side.UPPER) for v in r.violations]
        assert order == sorted(order)

    def test_header(self, te):
        text = render_text(analyze_case(te, "IDV(1)"))
        assert text.splitlines()[0].endswith("CONFLICT (8 violated bounds)")


class TestJson:
    def test_idv11_length(self, te):
        doc = json.loads(render_json(analyze_case(te, "IDV(11)")))
        assert len(doc["violations"]) == 12
        assert doc["schema_version"] == 1 and doc["outcome"] == "conflict"

    def test_mode_echoed(self, te):
        for mode in ("strict", "paper"):
            assert json.loads(render_json(analyze_case(te, "IDV(1)", mode)))["mode"] == mode

    def test_byte_determinism(self, te):
        a = render_json(analyze_case(te, "IDV(13)", capture_graph=True))
        b = render_json(analyze_case(te, "IDV(13)", capture_graph=True))
        assert a == b and "digraph" in json.loads(a)["graph_dot"]

    def test_all(self, te):
        doc = json.loads(render_all_json(analyze_all(te)))
        assert doc["conflicting_disturbances"] == ["IDV(1)", "IDV(11)", "IDV(13)"]
        assert [r["disturbance"] for r in doc["reports"]] == ["IDV(1)", "IDV(11)", "IDV(13)"]

    def test_exact_numbers(self):
        assert format_number(Fraction(5, 2)) == "2.5"
        assert format_number(Fraction(-1, 8)) == "-0.125"
        assert format_number(Fraction(1, 3)) == "1/3"
        assert format_number(Fraction(42)) == "42"


class TestPaperMode:
    def scenario(self):
        vs = (MonitoredVariable("x", "", Interval(0, 1)),
              MonitoredVariable("y", "", Interval(0, 1)),
              MonitoredVariable("z", "", Interval(0, 1)))
        case = DisturbanceCase("bad", {"x": Interval(0, 2), "y": Interval(-1, 1),
                                       "z": Interval(5, 9)})
        ref = LiteralRef
        spec = DomainSpec(
            {"Dx": ((ref("x", Side.LOWER), ref("x", Side.UPPER)),),
             "Dy": ((ref("y", Side.LOWER),),)},
            ("and", ("Dx", "Dy")))
        return Scenario("toy", vs, (case,), spec)

    def test_core_violations_with_subdomains(self):
        s = self.scenario()
        r = analyze_case(s, "bad", "paper")
        assert r.conflict
        # z.upper is also breached but no sub-domain mentions it
        got = {(v.variable, v.side.value, v.subdomains) for v in r.violations}
        assert got <= {("x", U, ("Dx",)), ("y", L, ("Dy",))}
        assert got
        assert "in D" in render_text(r)

    def test_paper_mode_te_is_sat(self, te):
        for idv in ("IDV(1)", "IDV(11)", "IDV(13)"):
            assert analyze_case(te, idv, "paper").outcome == "no_conflict"
