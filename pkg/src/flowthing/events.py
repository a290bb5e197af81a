"""Events as named regions of a static model, and heuristic eventizing."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import Diagnostic, EventError
from .model import IDENT_RE, Model

ArcKey = tuple[str, str]


@dataclass(frozen=True)
class Region:
    stages: frozenset[str] = frozenset()
    flows: frozenset[ArcKey] = frozenset()
    triggers: frozenset[ArcKey] = frozenset()

    @classmethod
    def of(
        cls,
        stages: Iterable[str] = (),
        flows: Iterable[ArcKey] = (),
        triggers: Iterable[ArcKey] = (),
    ) -> Region:
        return cls(frozenset(stages), frozenset(map(tuple, flows)), frozenset(map(tuple, triggers)))

    def issubset(self, other: Region) -> bool:
        return (
            self.stages <= other.stages
            and self.flows <= other.flows
            and self.triggers <= other.triggers
        )

    def union(self, other: Region) -> Region:
        return Region(
            self.stages | other.stages,
            self.flows | other.flows,
            self.triggers | other.triggers,
        )

    @property
    def arcs(self) -> frozenset[tuple[str, ArcKey]]:
        return frozenset({("flow", k) for k in self.flows} | {("trigger", k) for k in self.triggers})

    def sort_key(self) -> tuple:
        return (
            min(self.stages) if self.stages else "",
            tuple(sorted(self.stages)),
            tuple(sorted(self.flows)),
            tuple(sorted(self.triggers)),
        )


@dataclass(frozen=True)
class EventDef:
    name: str
    region: Region
    parent: str | None = None
    time_window: tuple[int, int] | None = None


def _components(nodes: Iterable[str], edges: Iterable[ArcKey]) -> list[set[str]]:
    parent: dict[str, str] = {n: n for n in nodes}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups: dict[str, set[str]] = {}
    for n in parent:
        groups.setdefault(find(n), set()).add(n)
    return list(groups.values())


def region_wellformed(model: Model, region: Region, name: str = "") -> Diagnostic | None:
    """Return the first problem with ``region``, or None when it is usable."""
    label = f"event {name}" if name else "region"
    if not region.stages:
        return Diagnostic("V009", f"{label} has an empty region", element=name or None)
    stages = model.stage_index()
    for path in sorted(region.stages):
        if path not in stages:
            return Diagnostic("V001", f"{label} references unknown stage {path}", element=name or None)
    flows = {a.key for a in model.flows}
    triggers = {a.key for a in model.triggers}
    for kind, known, keys in (("flow", flows, region.flows), ("trigger", triggers, region.triggers)):
        for key in sorted(keys):
            if key not in known:
                return Diagnostic(
                    "V001", f"{label} references unknown {kind} {key[0]} -> {key[1]}",
                    element=name or None,
                )
            missing = [p for p in key if p not in region.stages]
            if missing:
                return Diagnostic(
                    "V001", f"{label} lists {kind} {key[0]} -> {key[1]} without stage {missing[0]}",
                    element=name or None,
                )
    parts = _components(region.stages, list(region.flows) + list(region.triggers))
    if len(parts) > 1:
        return Diagnostic(
            "V008", f"{label} region splits into {len(parts)} disconnected parts",
            element=name or None,
        )
    return None


def define_event(
    model: Model,
    name: str,
    region: Region,
    parent: str | None = None,
    registry: dict[str, EventDef] | None = None,
) -> EventDef:
    """Check and register an event; overlap with other events is allowed."""
    if not IDENT_RE.match(name):
        raise EventError(Diagnostic("P002", f"invalid event name {name!r}"))
    registry = {} if registry is None else registry
    problem = region_wellformed(model, region, name)
    if problem:
        raise EventError(problem)
    if parent is not None:
        if parent not in registry:
            raise EventError(Diagnostic("V001", f"event {name} has unknown parent {parent}", element=name))
        if not region.issubset(registry[parent].region):
            raise EventError(
                Diagnostic("V011", f"event {name} is not contained in parent {parent}", element=name)
            )
    event = EventDef(name, region, parent)
    registry[name] = event
    return event


def is_subevent(a: EventDef, b: EventDef) -> bool:
    return a.region.issubset(b.region)


def effective_region(name: str, events: Mapping[str, EventDef]) -> Region:
    """An event's region joined with the regions of all its sub-events."""
    region = events[name].region
    for other in events.values():
        cursor, seen = other.parent, set()
        while cursor is not None and cursor not in seen:
            if cursor == name:
                region = region.union(other.region)
                break
            seen.add(cursor)
            cursor = events[cursor].parent if cursor in events else None
    return region


@dataclass
class _Candidate:
    stages: set[str] = field(default_factory=set)
    flows: set[ArcKey] = field(default_factory=set)
    triggers: set[ArcKey] = field(default_factory=set)

    def freeze(self) -> Region:
        return Region(frozenset(self.stages), frozenset(self.flows), frozenset(self.triggers))


def eventize(model: Model) -> list[Region]:
    """Cut a model into candidate event regions.

    Heuristic: flow arcs entering a trigger target are boundaries.  The
    remaining flow arcs fall into weakly connected segments, one candidate
    each.  Every boundary arc and every trigger arc then joins the candidate
    that holds its target stage, pulling its source stage in with it.
    Candidates may share stages; each arc lands in exactly one candidate.
    """
    targets = {a.target.path for a in model.triggers}
    inner = [a.key for a in model.flows if a.target.path not in targets]
    boundary = [a.key for a in model.flows if a.target.path in targets]

    nodes = {p for key in inner for p in key}
    candidates: list[_Candidate] = []
    home: dict[str, _Candidate] = {}
    for group in sorted(_components(nodes, inner), key=min):
        cand = _Candidate(stages=set(group))
        candidates.append(cand)
        for p in group:
            home[p] = cand
    for key in inner:
        home[key[0]].flows.add(key)

    def attach(source: str, target: str) -> _Candidate:
        cand = home.get(target)
        if cand is None:
            cand = _Candidate(stages={target})
            candidates.append(cand)
            home[target] = cand
        cand.stages.add(source)
        return cand

    for key in boundary:
        attach(*key).flows.add(key)
    for arc in model.triggers:
        attach(*arc.key).triggers.add(arc.key)

    return sorted((c.freeze() for c in candidates), key=Region.sort_key)
