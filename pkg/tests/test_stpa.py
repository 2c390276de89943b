import json

import pytest

from safesec_cdcl.stpa import (
    ActionType,
    CatalogError,
    ImpactKind,
    identify_conflict_candidates,
    load_catalog,
    validate_traceability,
)


def mutate(text, fn):
    data = json.loads(text)
    fn(data)
    return json.dumps(data)


class TestLoad:
    def test_counts(self, catalog):
        assert len(catalog.losses) == 5
        assert len(catalog.hazards) == 5
        assert len(catalog.control_actions) == 5
        assert len(catalog.ucas) == 5
        assert len(catalog.threats) == 8
        assert {t.id for t in catalog.threats} >= {"SCT-A-1", "SCT-A-2"}

    def test_dangling_loss_names_both_ids(self, catalog_text):
        def bad(d):
            d["hazards"][2]["leads_to"].append("L-9")
        with pytest.raises(CatalogError) as info:
            load_catalog(mutate(catalog_text, bad))
        assert "H-3" in str(info.value) and "L-9" in str(info.value)

    def test_duplicate_id(self, catalog_text):
        def dup(d):
            d["losses"].append(dict(d["losses"][0]))
        with pytest.raises(CatalogError, match="L-1"):
            load_catalog(mutate(catalog_text, dup))

    def test_malformed_id(self, catalog_text):
        def bad(d):
            d["hazards"][0]["id"] = "Hazard-1"
        with pytest.raises(CatalogError):
            load_catalog(mutate(catalog_text, bad))

    def test_threat_prefix_must_match_cia(self, catalog_text):
        def bad(d):
            d["threats"][0]["cia"] = "availability" if d["threats"][0]["id"][4] != "A" else "integrity"
        with pytest.raises(CatalogError):
            load_catalog(mutate(catalog_text, bad))

    def test_unknown_context(self, catalog_text):
        def bad(d):
            d["control_actions"][0]["impact"]["night_shift"] = {"provided": "safe"}
        with pytest.raises(CatalogError, match="night_shift"):
            load_catalog(mutate(catalog_text, bad))

    def test_empty_catalog(self):
        for text in ("", "{}"):
            c = load_catalog(text)
            assert c.hazards == () and c.contexts == ("any",)
            assert identify_conflict_candidates(c) == []
            assert validate_traceability(c).clean

    def test_bad_json(self):
        with pytest.raises(CatalogError):
            load_catalog("{not json")

    def test_impact_lookup(self, catalog):
        ca3 = next(a for a in catalog.control_actions if a.id == "CA-3")
        imp = ca3.impact_of("any", ActionType.PROVIDED)
        assert imp.kind is ImpactKind.HAZARDOUS and imp.hazards


class TestTraceability:
    def test_fixture(self, catalog):
        report = validate_traceability(catalog)
        assert report.uncovered_threats == ()
        assert report.uncovered_hazards == ("H-5",)
        assert report.unreachable_losses == ()
        assert report.ucas_without_hazard == ()
        assert not report.clean

    def test_removing_availability_constraints(self, catalog_text):
        def drop(d):
            d["constraints"] = [c for c in d["constraints"]
                                if c["id"] not in ("SC-A-1", "SC-A-2")]
        report = validate_traceability(load_catalog(mutate(catalog_text, drop)))
        assert report.uncovered_threats == ("SCT-A-1", "SCT-A-2")
        assert any("SCT-A-1" in line for line in report.lines())


def brute_force_candidates(catalog):
    out = set()
    for a in catalog.control_actions:
        for ctx in catalog.contexts:
            row = a.impact.get(ctx, {})
            p = row.get(ActionType.PROVIDED)
            n = row.get(ActionType.NOT_PROVIDED)
            if p is not None and n is not None and \
                    p.kind is ImpactKind.HAZARDOUS and n.kind is ImpactKind.HAZARDOUS:
                out.add((a.id, ctx))
    return out


class TestCandidates:
    def test_fixture(self, catalog):
        got = [(c.control_action, c.context) for c in identify_conflict_candidates(catalog)]
        assert got == [("CA-3", "any"), ("CA-4", "disturbance_active")]

    def test_sound_and_complete(self, catalog):
        got = identify_conflict_candidates(catalog)
        assert {(c.control_action, c.context) for c in got} == brute_force_candidates(catalog)
        for c in got:
            assert all(c.hazards_both_ways)
            assert c.source_controller == "controller"

    def test_not_applicable_never_flagged(self, catalog_text):
        def na(d):
            for ctx in d["control_actions"][2]["impact"].values():
                ctx["provided"] = "not_applicable"
        got = identify_conflict_candidates(load_catalog(mutate(catalog_text, na)))
        assert [c.control_action for c in got] == ["CA-4"]

    def test_timing_rows_ignored(self, catalog_text):
        # CA-4 is hazardous when too early/late in "any", but that is not a conflict
        got = identify_conflict_candidates(load_catalog(catalog_text))
        assert ("CA-4", "any") not in {(c.control_action, c.context) for c in got}

    def test_deterministic(self, catalog_text):
        a = load_catalog(catalog_text)
        b = load_catalog(catalog_text)
        assert identify_conflict_candidates(a) == identify_conflict_candidates(b)
        assert validate_traceability(a) == validate_traceability(b)
