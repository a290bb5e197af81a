"""Graph representation of a flowthing model.

A model is a forest of spheres.  Spheres hold flow machines, machines hold
stage nodes, and the model keeps two ordered arc lists: solid flow arcs that
move the same thing between stages, and dashed trigger arcs that create or
re-activate a flow elsewhere.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator

from .errors import (
    DuplicateArc,
    DuplicateGuard,
    DuplicateMachine,
    DuplicateSphere,
    DuplicateStageKind,
    IllegalAdjacency,
    IllegalTriggerTarget,
    InvalidIdentifier,
    MixedReceive,
    UnknownGuard,
    UnknownParent,
    UnknownSphere,
    UnknownStage,
)

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class StageKind(str, Enum):
    # declaration order is the canonical serialization order
    CREATE = "create"
    RECEIVE = "receive"
    ARRIVE = "arrive"
    ACCEPT = "accept"
    PROCESS = "process"
    RELEASE = "release"
    TRANSFER = "transfer"

    @property
    def rank(self) -> int:
        return _KIND_RANK[self]


_KIND_RANK = {k: i for i, k in enumerate(StageKind)}

TRIGGER_TARGETS = frozenset({StageKind.CREATE, StageKind.RELEASE, StageKind.PROCESS})

_SAME_MACHINE = {
    StageKind.CREATE: frozenset({StageKind.PROCESS, StageKind.RELEASE}),
    StageKind.ARRIVE: frozenset({StageKind.ACCEPT}),
    StageKind.ACCEPT: frozenset({StageKind.PROCESS, StageKind.RELEASE}),
    StageKind.RECEIVE: frozenset({StageKind.PROCESS, StageKind.RELEASE}),
    StageKind.PROCESS: frozenset({StageKind.RELEASE}),
    StageKind.RELEASE: frozenset({StageKind.TRANSFER}),
}
_CROSS_MACHINE = {
    StageKind.TRANSFER: frozenset({StageKind.TRANSFER, StageKind.ARRIVE, StageKind.RECEIVE}),
}


def legal_successors(kind: StageKind, same_machine: bool) -> frozenset[StageKind]:
    """Stage kinds a flow arc may reach from ``kind``.

    Storage annexes are not stage kinds; a stage with attached storage may
    always park a thing there and resume from it (handled by the engine).
    """
    table = _SAME_MACHINE if same_machine else _CROSS_MACHINE
    return table.get(kind, frozenset())


def check_identifier(name: str) -> str:
    if not isinstance(name, str) or not IDENT_RE.match(name):
        raise InvalidIdentifier(f"invalid identifier {name!r}")
    return name


@dataclass(frozen=True, order=True)
class StageNode:
    machine: str
    kind: StageKind

    @property
    def path(self) -> str:
        return f"{self.machine}.{self.kind.value}"

    def __str__(self) -> str:
        return self.path


@dataclass(frozen=True)
class FlowArc:
    source: StageNode
    target: StageNode

    @property
    def key(self) -> tuple[str, str]:
        return (self.source.path, self.target.path)

    @property
    def same_machine(self) -> bool:
        return self.source.machine == self.target.machine


@dataclass(frozen=True)
class TriggerArc:
    source: StageNode
    target: StageNode
    guard: str | None = None

    @property
    def key(self) -> tuple[str, str]:
        return (self.source.path, self.target.path)


@dataclass
class Machine:
    name: str
    owner: str
    thing_label: str
    stages: list[StageNode] = field(default_factory=list)
    storage_attached: set[StageKind] = field(default_factory=set)

    @property
    def path(self) -> str:
        return f"{self.owner}.{self.name}"

    def kinds(self) -> list[StageKind]:
        return [s.kind for s in self.stages]

    def stage(self, kind: StageKind) -> StageNode | None:
        for s in self.stages:
            if s.kind == kind:
                return s
        return None


@dataclass
class Sphere:
    name: str
    path: str
    children: dict[str, Sphere] = field(default_factory=dict)
    machines: dict[str, Machine] = field(default_factory=dict)
    things: set[str] = field(default_factory=set)

    @property
    def depth(self) -> int:
        return self.path.count(".") + 1


def flow_violation(source: StageNode, target: StageNode) -> str | None:
    """Rule code for an illegal flow arc, or None when the arc is legal.

    Each illegal arc maps to exactly one code: arcs into Create are V005,
    cross-machine arcs leaving a non-Transfer stage are V007, and every
    other pair outside the adjacency table is V002.
    """
    same = source.machine == target.machine
    if target.kind == StageKind.CREATE:
        return "V005"
    if not same and source.kind != StageKind.TRANSFER:
        return "V007"
    if target.kind not in legal_successors(source.kind, same):
        return "V002"
    return None


@dataclass
class Model:
    name: str
    root_spheres: dict[str, Sphere] = field(default_factory=dict)
    flows: list[FlowArc] = field(default_factory=list)
    triggers: list[TriggerArc] = field(default_factory=list)
    guards: set[str] = field(default_factory=set)

    # -- lookup -----------------------------------------------------------

    def iter_spheres(self) -> Iterator[Sphere]:
        stack = list(reversed(list(self.root_spheres.values())))
        while stack:
            sphere = stack.pop()
            yield sphere
            stack.extend(reversed(list(sphere.children.values())))

    def iter_machines(self) -> Iterator[Machine]:
        for sphere in self.iter_spheres():
            yield from sphere.machines.values()

    def iter_stages(self) -> Iterator[StageNode]:
        for machine in self.iter_machines():
            yield from machine.stages

    def sphere(self, path: str) -> Sphere | None:
        parts = path.split(".")
        node = self.root_spheres.get(parts[0])
        for part in parts[1:]:
            if node is None:
                return None
            node = node.children.get(part)
        return node

    def machine(self, path: str) -> Machine | None:
        owner, _, name = path.rpartition(".")
        sphere = self.sphere(owner) if owner else None
        return sphere.machines.get(name) if sphere else None

    def stage(self, path: str) -> StageNode | None:
        machine_path, _, kind = path.rpartition(".")
        machine = self.machine(machine_path) if machine_path else None
        if machine is None:
            return None
        try:
            return machine.stage(StageKind(kind))
        except ValueError:
            return None

    def stage_index(self) -> dict[str, StageNode]:
        return {s.path: s for s in self.iter_stages()}

    def machine_index(self) -> dict[str, Machine]:
        return {m.path: m for m in self.iter_machines()}

    # -- construction -----------------------------------------------------

    def add_sphere(self, path: str) -> Sphere:
        parts = path.split(".")
        for part in parts:
            check_identifier(part)
        name = parts[-1]
        if len(parts) == 1:
            siblings = self.root_spheres
        else:
            parent = self.sphere(".".join(parts[:-1]))
            if parent is None:
                raise UnknownParent(f"no parent sphere for {path}")
            if name in parent.machines:
                raise DuplicateSphere(f"{path} already names a machine")
            siblings = parent.children
        if name in siblings:
            raise DuplicateSphere(f"duplicate sphere {path}")
        sphere = Sphere(name=name, path=path)
        siblings[name] = sphere
        return sphere

    def add_machine(
        self,
        sphere: str,
        name: str,
        thing_label: str,
        stage_kinds: Iterable[StageKind | str],
        storage: Iterable[StageKind | str] = (),
    ) -> Machine:
        check_identifier(name)
        check_identifier(thing_label)
        owner = self.sphere(sphere)
        if owner is None:
            raise UnknownSphere(f"unknown sphere {sphere}")
        if name in owner.machines or name in owner.children:
            raise DuplicateMachine(f"duplicate machine {sphere}.{name}")
        kinds = [StageKind(k) for k in stage_kinds]
        if not kinds:
            raise InvalidIdentifier(f"machine {sphere}.{name} has no stages")
        if len(set(kinds)) != len(kinds):
            raise DuplicateStageKind(f"machine {sphere}.{name} repeats a stage kind")
        kindset = set(kinds)
        if StageKind.RECEIVE in kindset and kindset & {StageKind.ARRIVE, StageKind.ACCEPT}:
            raise MixedReceive(
                f"machine {sphere}.{name} mixes receive with arrive/accept"
            )
        stored = {StageKind(k) for k in storage}
        if not stored <= kindset:
            raise UnknownStage(f"storage on a stage {sphere}.{name} does not have")
        machine = Machine(name=name, owner=sphere, thing_label=thing_label)
        machine.stages = [StageNode(machine.path, k) for k in sorted(kindset, key=_KIND_RANK.get)]
        machine.storage_attached = stored
        owner.machines[name] = machine
        return machine

    def add_thing(self, sphere: str, name: str) -> None:
        owner = self.sphere(sphere)
        if owner is None:
            raise UnknownSphere(f"unknown sphere {sphere}")
        owner.things.add(check_identifier(name))

    def add_guard(self, name: str) -> str:
        check_identifier(name)
        if name in self.guards:
            raise DuplicateGuard(f"duplicate guard {name}")
        self.guards.add(name)
        return name

    def _resolve(self, ref: StageNode | str) -> StageNode:
        path = ref.path if isinstance(ref, StageNode) else ref
        node = self.stage(path)
        if node is None:
            raise UnknownStage(f"unknown stage {path}")
        return node

    def add_flow(self, source: StageNode | str, target: StageNode | str) -> FlowArc:
        src, dst = self._resolve(source), self._resolve(target)
        code = flow_violation(src, dst)
        if code:
            raise IllegalAdjacency(src.kind, dst.kind, src.machine == dst.machine, code)
        arc = FlowArc(src, dst)
        if any(a.key == arc.key for a in self.flows):
            raise DuplicateArc(f"duplicate flow {src} -> {dst}")
        self.flows.append(arc)
        return arc

    def add_trigger(
        self, source: StageNode | str, target: StageNode | str, guard: str | None = None
    ) -> TriggerArc:
        src, dst = self._resolve(source), self._resolve(target)
        if dst.kind not in TRIGGER_TARGETS:
            raise IllegalTriggerTarget(f"trigger cannot target {dst}")
        if guard is not None and guard not in self.guards:
            raise UnknownGuard(f"undeclared guard {guard}")
        arc = TriggerArc(src, dst, guard)
        if any(a.key == arc.key for a in self.triggers):
            raise DuplicateArc(f"duplicate trigger {src} ~> {dst}")
        self.triggers.append(arc)
        return arc


def new_model(name: str) -> Model:
    return Model(name=check_identifier(name))


def structure(model: Model) -> tuple:
    """Order-insensitive summary used for structural equality."""
    spheres = frozenset((s.path, frozenset(s.things)) for s in model.iter_spheres())
    machines = frozenset(
        (
            m.path,
            m.thing_label,
            frozenset(s.kind for s in m.stages),
            frozenset(m.storage_attached),
        )
        for m in model.iter_machines()
    )
    flows = frozenset(a.key for a in model.flows)
    triggers = frozenset((a.key, a.guard) for a in model.triggers)
    return (model.name, spheres, machines, flows, triggers, frozenset(model.guards))


def structurally_equal(a: Model, b: Model) -> bool:
    return structure(a) == structure(b)
