"""STPA-SafeSec catalog: losses, hazards, control actions, UCAs, threats
and the constraints that address them.

A catalog is validated for referential integrity when it is loaded. On top
of it, :func:`validate_traceability` reports coverage gaps and
:func:`identify_conflict_candidates` applies the provided / not-provided
conflict rule per (control action, context).
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass
from typing import Any, Mapping, Optional

__all__ = [
    "CatalogError",
    "ActionType",
    "ImpactKind",
    "Impact",
    "Loss",
    "Hazard",
    "ControlAction",
    "UnsafeControlAction",
    "Threat",
    "ConstraintReq",
    "StpaCatalog",
    "ConflictCandidate",
    "ValidationReport",
    "load_catalog",
    "validate_traceability",
    "identify_conflict_candidates",
]

DEFAULT_CONTEXT = "any"
DEFAULT_CONTROLLER = "controller"


class CatalogError(ValueError):
    pass


class ActionType(str, enum.Enum):
    NOT_PROVIDED = "not_provided"
    PROVIDED = "provided"
    TOO_EARLY_LATE = "too_early_late"
    STOPPED_EARLY_LATE = "stopped_early_late"


class ImpactKind(str, enum.Enum):
    HAZARDOUS = "hazardous"
    NOT_APPLICABLE = "not_applicable"
    SAFE = "safe"


@dataclass(frozen=True)
class Impact:
    kind: ImpactKind
    hazards: tuple[str, ...] = ()
    note: str = ""

    @property
    def hazardous(self) -> bool:
        return self.kind is ImpactKind.HAZARDOUS


@dataclass(frozen=True)
class Loss:
    id: str
    description: str


@dataclass(frozen=True)
class Hazard:
    id: str
    description: str
    leads_to: tuple[str, ...]


@dataclass(frozen=True)
class ControlAction:
    id: str
    description: str
    impact: Mapping[str, Mapping[ActionType, Impact]]
    controller: str = DEFAULT_CONTROLLER

    def impact_of(self, context: str, action: ActionType) -> Optional[Impact]:
        return self.impact.get(context, {}).get(action)


@dataclass(frozen=True)
class UnsafeControlAction:
    id: str
    control_action: str
    description: str
    causes: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class Threat:
    id: str
    cia: str
    description: str
    scenarios: tuple[str, ...] = ()


@dataclass(frozen=True)
class ConstraintReq:
    id: str
    kind: str
    description: str
    addresses: tuple[str, ...]


@dataclass(frozen=True)
class StpaCatalog:
    losses: tuple[Loss, ...] = ()
    hazards: tuple[Hazard, ...] = ()
    control_actions: tuple[ControlAction, ...] = ()
    ucas: tuple[UnsafeControlAction, ...] = ()
    threats: tuple[Threat, ...] = ()
    constraints: tuple[ConstraintReq, ...] = ()
    contexts: tuple[str, ...] = (DEFAULT_CONTEXT,)


_ID_PATTERNS = {
    "losses": re.compile(r"L-\d+"),
    "hazards": re.compile(r"H-\d+"),
    "control_actions": re.compile(r"CA-\d+"),
    "ucas": re.compile(r"UCA-\d+"),
    "threats": re.compile(r"SCT-[CIA]-\d+"),
    "constraints": re.compile(r"SC-[A-Z]+-\d+"),
}
_CIA_PREFIX = {"confidentiality": "C", "integrity": "I", "availability": "A"}
_SECTIONS = ("losses", "hazards", "control_actions", "ucas", "threats",
             "constraints", "contexts")


def _require(entry: Mapping[str, Any], key: str, section: str) -> Any:
    if key not in entry:
        raise CatalogError(f"{section} entry {entry.get('id', '?')!r} lacks {key!r}")
    return entry[key]


def _check_keys(entry: Mapping[str, Any], allowed: set, section: str) -> None:
    extra = set(entry) - allowed
    if extra:
        raise CatalogError(
            f"{section} entry {entry.get('id', '?')!r} has unknown fields {sorted(extra)}")


def _parse_impact(value: Any, owner: str) -> Impact:
    if isinstance(value, str):
        try:
            kind = ImpactKind(value)
        except ValueError:
            raise CatalogError(f"{owner}: unknown impact {value!r}") from None
        if kind is ImpactKind.HAZARDOUS:
            raise CatalogError(f"{owner}: hazardous impact must list hazards")
        return Impact(kind)
    if isinstance(value, Mapping) and "hazardous" in value:
        _check_keys(value, {"hazardous", "note"}, owner)
        refs = tuple(value["hazardous"])
        if not refs:
            raise CatalogError(f"{owner}: hazardous impact must list hazards")
        return Impact(ImpactKind.HAZARDOUS, refs, value.get("note", ""))
    raise CatalogError(f"{owner}: malformed impact {value!r}")


def load_catalog(text: str) -> StpaCatalog:
    try:
        data = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as exc:
        raise CatalogError(f"invalid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise CatalogError("catalog must be a JSON object")
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise CatalogError(f"unknown catalog sections {sorted(unknown)}")

    seen: dict[str, str] = {}

    def register(section: str, entry: Mapping[str, Any]) -> str:
        id_ = _require(entry, "id", section)
        if not isinstance(id_, str) or not _ID_PATTERNS[section].fullmatch(id_):
            raise CatalogError(f"malformed {section} id {id_!r}")
        if id_ in seen:
            raise CatalogError(f"duplicate id {id_!r}")
        seen[id_] = section
        return id_

    contexts = tuple(data.get("contexts", [DEFAULT_CONTEXT]))
    if len(set(contexts)) != len(contexts):
        raise CatalogError("duplicate context tag")

    losses = []
    for e in data.get("losses", []):
        _check_keys(e, {"id", "description"}, "loss")
        losses.append(Loss(register("losses", e), e.get("description", "")))

    hazards = []
    for e in data.get("hazards", []):
        _check_keys(e, {"id", "description", "leads_to"}, "hazard")
        hid = register("hazards", e)
        leads = tuple(_require(e, "leads_to", "hazard"))
        if not leads:
            raise CatalogError(f"hazard {hid} leads to no loss")
        hazards.append(Hazard(hid, e.get("description", ""), leads))

    actions = []
    for e in data.get("control_actions", []):
        _check_keys(e, {"id", "description", "impact", "controller"}, "control action")
        cid = register("control_actions", e)
        impact = {}
        for ctx, row in e.get("impact", {}).items():
            if ctx not in contexts:
                raise CatalogError(f"{cid} uses undeclared context {ctx!r}")
            parsed = {}
            for action, value in row.items():
                try:
                    at = ActionType(action)
                except ValueError:
                    raise CatalogError(f"{cid}: unknown action type {action!r}") from None
                parsed[at] = _parse_impact(value, f"{cid}[{ctx}][{action}]")
            impact[ctx] = parsed
        actions.append(ControlAction(cid, e.get("description", ""), impact,
                                     e.get("controller", DEFAULT_CONTROLLER)))

    ucas = []
    for e in data.get("ucas", []):
        _check_keys(e, {"id", "control_action", "description", "causes"}, "uca")
        uid = register("ucas", e)
        causes = tuple((k, v) for k, v in e.get("causes", {}).items())
        ucas.append(UnsafeControlAction(uid, _require(e, "control_action", "uca"),
                                        e.get("description", ""), causes))

    threats = []
    for e in data.get("threats", []):
        _check_keys(e, {"id", "cia", "description", "scenarios"}, "threat")
        tid = register("threats", e)
        cia = _require(e, "cia", "threat")
        if _CIA_PREFIX.get(cia) != tid.split("-")[1]:
            raise CatalogError(f"threat {tid} prefix does not match cia {cia!r}")
        threats.append(Threat(tid, cia, e.get("description", ""),
                              tuple(e.get("scenarios", []))))

    constraints = []
    for e in data.get("constraints", []):
        _check_keys(e, {"id", "kind", "description", "addresses"}, "constraint")
        sid = register("constraints", e)
        kind = _require(e, "kind", "constraint")
        if kind not in ("safety", "security"):
            raise CatalogError(f"constraint {sid} has unknown kind {kind!r}")
        addresses = tuple(_require(e, "addresses", "constraint"))
        if not addresses:
            raise CatalogError(f"constraint {sid} addresses nothing")
        constraints.append(ConstraintReq(sid, kind, e.get("description", ""), addresses))

    def expect(ref: str, sections: tuple[str, ...], owner: str) -> None:
        if seen.get(ref) not in sections:
            raise CatalogError(f"{owner} references unknown id {ref}")

    for h in hazards:
        for ref in h.leads_to:
            expect(ref, ("losses",), h.id)
    for a in actions:
        for row in a.impact.values():
            for imp in row.values():
                for ref in imp.hazards:
                    expect(ref, ("hazards",), a.id)
    for u in ucas:
        expect(u.control_action, ("control_actions",), u.id)
    for c in constraints:
        for ref in c.addresses:
            expect(ref, ("hazards", "threats"), c.id)

    return StpaCatalog(tuple(losses), tuple(hazards), tuple(actions),
                       tuple(ucas), tuple(threats), tuple(constraints), contexts)


@dataclass(frozen=True)
class ValidationReport:
    uncovered_hazards: tuple[str, ...] = ()
    uncovered_threats: tuple[str, ...] = ()
    ucas_without_hazard: tuple[str, ...] = ()
    unreachable_losses: tuple[str, ...] = ()

    @property
    def clean(self) -> bool:
        return not (self.uncovered_hazards or self.uncovered_threats
                    or self.ucas_without_hazard or self.unreachable_losses)

    def lines(self) -> list[str]:
        out = []
        for h in self.uncovered_hazards:
            out.append(f"hazard {h} is not addressed by any constraint")
        for t in self.uncovered_threats:
            out.append(f"threat {t} is not addressed by any constraint")
        for u in self.ucas_without_hazard:
            out.append(f"{u} refers to a control action with no hazardous impact")
        for l in self.unreachable_losses:
            out.append(f"loss {l} is not reachable from any hazard")
        return out


def validate_traceability(c: StpaCatalog) -> ValidationReport:
    addressed = {ref for con in c.constraints for ref in con.addresses}
    reached = {l for h in c.hazards for l in h.leads_to}
    actions = {a.id: a for a in c.control_actions}

    def has_hazard(ca_id: str) -> bool:
        return any(imp.hazardous for row in actions[ca_id].impact.values()
                   for imp in row.values())

    return ValidationReport(
        uncovered_hazards=tuple(h.id for h in c.hazards if h.id not in addressed),
        uncovered_threats=tuple(t.id for t in c.threats if t.id not in addressed),
        ucas_without_hazard=tuple(u.id for u in c.ucas
                                  if not has_hazard(u.control_action)),
        unreachable_losses=tuple(l.id for l in c.losses if l.id not in reached),
    )


@dataclass(frozen=True)
class ConflictCandidate:
    source_controller: str
    action_type: tuple[ActionType, ActionType]
    control_action: str
    context: str
    hazards_both_ways: tuple[tuple[str, ...], tuple[str, ...]]

    def describe(self) -> str:
        provided, not_provided = self.hazards_both_ways
        return (f"{self.control_action} @ {self.context} ({self.source_controller}): "
                f"provided -> {', '.join(provided)}; "
                f"not provided -> {', '.join(not_provided)}")


def identify_conflict_candidates(c: StpaCatalog) -> list[ConflictCandidate]:
    """(CA, context) pairs where both providing and not providing are hazardous."""
    out = []
    for action in c.control_actions:
        for ctx in c.contexts:
            provided = action.impact_of(ctx, ActionType.PROVIDED)
            withheld = action.impact_of(ctx, ActionType.NOT_PROVIDED)
            if provided and withheld and provided.hazardous and withheld.hazardous:
                out.append(ConflictCandidate(
                    action.controller,
                    (ActionType.PROVIDED, ActionType.NOT_PROVIDED),
                    action.id, ctx,
                    (provided.hazards, withheld.hazards)))
    out.sort(key=lambda cand: (_id_number(cand.control_action), cand.context))
    return out


def _id_number(id_: str) -> int:
    return int(id_.rsplit("-", 1)[1])
