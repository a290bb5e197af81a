"""Whole-model semantic checks.

Rule table (errors unless noted):

=====  ==============================================================
V001   unresolved reference (event region, event parent, constraint,
       arc endpoint, storage annex)
V002   flow arc outside the adjacency table
V003   duplicate stage kind in a machine
V004   receive mixed with arrive/accept in one machine
V005   create stage with an incoming flow arc
V006   trigger target outside {create, release, process}
V007   cross-machine flow arc whose source is not transfer
V008   event region not weakly connected
V009   empty event region
V010   guard used but never declared
V011   sub-event region not contained in its parent's region
V012   control program references an undefined event
W001   (warning) stage with no incoming arc that is not a create stage
=====  ==============================================================
"""

from __future__ import annotations

from dataclasses import replace
from typing import Iterable, Mapping

from .errors import Diagnostic
from .events import EventDef, region_wellformed
from .model import TRIGGER_TARGETS, Model, StageKind, flow_violation
from .program import Constraint, Deadline, Inhibit, Node, referenced_events

RULES = {
    "V001": "unresolved reference",
    "V002": "flow arc outside the adjacency table",
    "V003": "duplicate stage kind in a machine",
    "V004": "receive mixed with arrive/accept",
    "V005": "create stage with incoming flow arc",
    "V006": "trigger target outside create/release/process",
    "V007": "cross-machine flow arc whose source is not transfer",
    "V008": "event region not weakly connected",
    "V009": "empty event region",
    "V010": "guard used but never declared",
    "V011": "sub-event region not a subset of parent region",
    "V012": "control program references undefined event",
    "W001": "stage unreachable (no incoming arc, not a create stage)",
}


def _err(code: str, message: str, element: str) -> Diagnostic:
    return Diagnostic(code, message, element=element)


def _check_model(model: Model) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    for machine in model.iter_machines():
        where = f"machine:{machine.path}"
        kinds = machine.kinds()
        dupes = sorted({k.value for k in kinds if kinds.count(k) > 1})
        for kind in dupes:
            out.append(_err("V003", f"machine {machine.path} has more than one {kind} stage", where))
        present = set(kinds)
        if StageKind.RECEIVE in present and present & {StageKind.ARRIVE, StageKind.ACCEPT}:
            out.append(_err("V004", f"machine {machine.path} mixes receive with arrive/accept", where))
        for kind in sorted(machine.storage_attached - present, key=lambda k: k.rank):
            out.append(_err("V001", f"storage on missing stage {machine.path}.{kind.value}", where))

    stages = model.stage_index()
    incoming: set[str] = set()
    for arc in model.flows:
        where = f"flow:{arc.source.path}->{arc.target.path}"
        missing = [s.path for s in (arc.source, arc.target) if s.path not in stages]
        if missing:
            out.append(_err("V001", f"flow endpoint {missing[0]} does not exist", where))
            continue
        incoming.add(arc.target.path)
        code = flow_violation(arc.source, arc.target)
        if code:
            out.append(_err(code, f"illegal flow {arc.source.path} -> {arc.target.path}", where))
    for arc in model.triggers:
        where = f"trigger:{arc.source.path}~>{arc.target.path}"
        missing = [s.path for s in (arc.source, arc.target) if s.path not in stages]
        if missing:
            out.append(_err("V001", f"trigger endpoint {missing[0]} does not exist", where))
            continue
        incoming.add(arc.target.path)
        if arc.target.kind not in TRIGGER_TARGETS:
            out.append(_err("V006", f"trigger cannot target {arc.target.path}", where))
        if arc.guard is not None and arc.guard not in model.guards:
            out.append(_err("V010", f"guard {arc.guard} is not declared", where))
    for path, node in stages.items():
        if node.kind != StageKind.CREATE and path not in incoming:
            out.append(Diagnostic(
                "W001", f"stage {path} has no incoming arc", severity="warning",
                element=f"machine:{node.machine}",
            ))
    return out


def _check_events(model: Model, events: Mapping[str, EventDef]) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    for name, event in events.items():
        where = f"event:{name}"
        problem = region_wellformed(model, event.region, name)
        if problem:
            out.append(_err(problem.code, problem.message, where))
        if event.parent is None:
            continue
        parent = events.get(event.parent)
        if parent is None:
            out.append(_err("V001", f"event {name} has unknown parent {event.parent}", where))
        elif not event.region.issubset(parent.region):
            out.append(_err("V011", f"event {name} is not contained in parent {event.parent}", where))
    return out


def _check_controls(controls: Mapping[str, Node], events: Mapping[str, EventDef]) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    for name, program in controls.items():
        reported: set[str] = set()
        for ref in referenced_events(program):
            if ref not in events and ref not in reported:
                reported.add(ref)
                out.append(_err("V012", f"control {name} runs undefined event {ref}", f"control:{name}"))
    return out


def _check_constraints(
    model: Model, constraints: Iterable[Constraint], events: Mapping[str, EventDef]
) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    for i, constraint in enumerate(constraints):
        where = f"constraint:{i}"
        if isinstance(constraint, Deadline):
            for ref in (constraint.first, constraint.last):
                if ref not in events:
                    out.append(_err("V001", f"deadline names unknown event {ref}", where))
        elif isinstance(constraint, Inhibit):
            if model.stage(constraint.target) is None:
                out.append(_err("V001", f"inhibit names unknown stage {constraint.target}", where))
            if constraint.when not in model.guards:
                out.append(_err("V010", f"guard {constraint.when} is not declared", where))
    return out


def validate(
    model: Model,
    events: Mapping[str, EventDef] | None = None,
    controls: Mapping[str, Node] | None = None,
    constraints: Iterable[Constraint] = (),
) -> list[Diagnostic]:
    """Run every rule; an empty list means the input is clean."""
    events = events or {}
    return (
        _check_model(model)
        + _check_events(model, events)
        + _check_controls(controls or {}, events)
        + _check_constraints(model, constraints, events)
    )


def validate_document(doc) -> list[Diagnostic]:
    return validate(doc.model, doc.events, doc.controls, doc.constraints)


def errors_only(diagnostics: Iterable[Diagnostic]) -> list[Diagnostic]:
    return [d for d in diagnostics if d.is_error]


def positioned(diagnostics: Iterable[Diagnostic], positions: Mapping[str, tuple[int, int]]) -> list[Diagnostic]:
    """Attach source positions to diagnostics whose element the parser saw."""
    out = []
    for d in diagnostics:
        where = positions.get(d.element or "")
        if d.line is None and where is not None:
            d = replace(d, line=where[0], column=where[1])
        out.append(d)
    return out
