"""Deterministic tick-based execution of a model, free-running or under a
control program, producing a trace.

One tick runs these phases in order:

1. program bookkeeping (controlled mode): activate the next Run nodes;
2. seeding of scenario tokens scheduled for this tick;
3. hop phase: each token, in id order, takes the first enabled outgoing
   flow arc (arcs sorted by target path), at most one hop per tick;
4. trigger phase: pending (trigger, token) activations are evaluated in
   trigger order, then token order;
5. event bookkeeping (controlled mode): quiescent regions end their event.

A flow arc into a trigger target (release/process) is gated: a token may
cross it only by consuming a permit that a firing of that trigger banked
on the target stage.  Inhibited targets accept no incoming hops while the
inhibiting guard reads true at the current tick.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ScenarioError, TickLimitExceeded
from .events import EventDef, Region, effective_region
from .model import TRIGGER_TARGETS, Model, StageKind
from .program import Constraint, Inhibit, Node, Par, RepeatIf, Run, Seq

STORAGE_SUFFIX = ".storage"


@dataclass
class Scenario:
    seeds: list[tuple[str, int]] = field(default_factory=list)
    guard_schedule: dict[str, list[bool]] = field(default_factory=dict)
    tick_limit: int = 1000
    delays: dict[str, int] = field(default_factory=dict)


@dataclass(frozen=True)
class Record:
    tick: int
    kind: str
    subjects: tuple[str, ...] = ()

    def line(self) -> str:
        text = f"tick={self.tick} kind={self.kind}"
        return f"{text} {' '.join(self.subjects)}" if self.subjects else text


@dataclass
class Trace:
    records: list[Record] = field(default_factory=list)
    end_tick: int = 0
    reason: str = "quiescent"
    # final token snapshot; not part of the text form
    tokens: list[Token] = field(default_factory=list, compare=False, repr=False)

    def lines(self) -> list[str]:
        return [r.line() for r in self.records] + [f"end tick={self.end_tick} reason={self.reason}"]

    def text(self) -> str:
        return "\n".join(self.lines()) + "\n"

    def of_kind(self, kind: str) -> list[Record]:
        return [r for r in self.records if r.kind == kind]

    def event_order(self) -> list[str]:
        return [r.subjects[0] for r in self.records if r.kind == "event-start"]


@dataclass
class Token:
    id: int
    thing_label: str
    at: str
    created_tick: int
    dwell: int = 0
    terminal: bool = False


def storage_of(stage: str) -> str:
    return stage + STORAGE_SUFFIX


def stage_of(location: str) -> str:
    return location[: -len(STORAGE_SUFFIX)] if location.endswith(STORAGE_SUFFIX) else location


def guard_at_tick(schedule: Mapping[str, list[bool]], guard: str, tick: int) -> bool:
    values = schedule.get(guard, ())
    return bool(values[tick]) if tick < len(values) else False


class Net:
    """Static lookup tables derived from a model."""

    def __init__(self, model: Model):
        self.model = model
        self.stages = model.stage_index()
        machines = model.machine_index()
        self.labels = {p: machines[s.machine].thing_label for p, s in self.stages.items()}
        self.kinds = {p: s.kind for p, s in self.stages.items()}
        self.out: dict[str, list[tuple[str, tuple[str, str]]]] = {p: [] for p in self.stages}
        for arc in model.flows:
            self.out[arc.source.path].append((arc.target.path, arc.key))
        for moves in self.out.values():
            moves.sort()
        self.parking = {
            s.path
            for m in machines.values()
            for s in m.stages
            if s.kind in m.storage_attached and not self.out[s.path]
        }
        self.triggers = sorted(model.triggers, key=lambda a: a.key)
        self.triggers_from: dict[str, list[int]] = {}
        for i, arc in enumerate(self.triggers):
            self.triggers_from.setdefault(arc.source.path, []).append(i)
        self.gated = {
            a.target.path
            for a in model.triggers
            if a.target.kind in (StageKind.RELEASE, StageKind.PROCESS)
        }
        self.terminal = {
            p for p, k in self.kinds.items() if k == StageKind.TRANSFER and not self.out[p]
        }

    def moves(self, location: str) -> list[tuple[str, tuple[str, str] | None, str]]:
        """(destination, flow key or None for a storage hop, source stage)."""
        if location.endswith(STORAGE_SUFFIX):
            stage = stage_of(location)
            return [(t, key, stage) for t, key in self.out[stage]]
        moves = [(t, key, location) for t, key in self.out[location]]
        if location in self.parking:
            moves.append((storage_of(location), None, location))
        return moves


def check_scenario(net: Net, scenario: Scenario) -> None:
    if scenario.tick_limit < 1:
        raise ScenarioError("tick limit must be at least 1")
    for stage, tick in scenario.seeds:
        if net.kinds.get(stage) != StageKind.CREATE:
            raise ScenarioError(f"seed stage {stage} is not a create stage")
        if tick < 0:
            raise ScenarioError(f"seed tick {tick} is negative")
    for stage, ticks in scenario.delays.items():
        if stage not in net.stages:
            raise ScenarioError(f"delay names unknown stage {stage}")
        if ticks < 0:
            raise ScenarioError(f"negative delay on {stage}")


# -- control program execution -------------------------------------------------


class _RunExec:
    def __init__(self, event: str, region: Region, lazy: bool = False):
        self.event = event
        self.region = region
        self.lazy = lazy
        self.state = "idle"
        self.started = False
        self.start_tick = -1
        self.executed = False

    def poll(self, sim: _Simulation, tick: int) -> bool:
        if self.state == "idle":
            self.state = "active"
            sim.active.append(self)
            if not self.lazy:
                sim.start_event(self, tick)
            return False
        return self.state == "done"


class _SeqExec:
    def __init__(self, children: tuple[Node, ...], build):
        self.children = children
        self.build = build
        self.index = 0
        self.current = None

    def poll(self, sim: _Simulation, tick: int) -> bool:
        while self.index < len(self.children):
            if self.current is None:
                self.current = self.build(self.children[self.index])
            if not self.current.poll(sim, tick):
                return False
            self.index += 1
            self.current = None
        return True


class _ParExec:
    def __init__(self, children: tuple[Node, ...], build):
        self.execs = [build(c) for c in children]

    def poll(self, sim: _Simulation, tick: int) -> bool:
        done = [e.poll(sim, tick) for e in self.execs]
        return all(done)


class _RepeatExec:
    def __init__(self, node: RepeatIf, build):
        self.node = node
        self.build = build
        self.cond = build.run(node.event, lazy=True)
        self.body = None

    def poll(self, sim: _Simulation, tick: int) -> bool:
        while True:
            if self.body is None:
                if not self.cond.poll(sim, tick):
                    return False
                if not self.cond.executed:
                    return True
                self.body = self.build(self.node.body)
            else:
                if not self.body.poll(sim, tick):
                    return False
                self.body = None
                self.cond = self.build.run(self.node.event, lazy=True)


class _Builder:
    def __init__(self, events: Mapping[str, EventDef]):
        self.events = events
        self.regions: dict[str, Region] = {}

    def region(self, name: str) -> Region:
        if name not in self.regions:
            self.regions[name] = effective_region(name, self.events)
        return self.regions[name]

    def run(self, name: str, lazy: bool = False) -> _RunExec:
        return _RunExec(name, self.region(name), lazy)

    def __call__(self, node: Node):
        if isinstance(node, Run):
            return self.run(node.event)
        if isinstance(node, Seq):
            return _SeqExec(node.children, self)
        if isinstance(node, Par):
            return _ParExec(node.children, self)
        if isinstance(node, RepeatIf):
            return _RepeatExec(node, self)
        raise TypeError(f"not a control node: {node!r}")


# -- the simulation ---------------------------------------------------------------


class _Simulation:
    def __init__(
        self,
        model: Model,
        events: Mapping[str, EventDef],
        program: Node | None,
        scenario: Scenario,
        constraints: Iterable[Constraint],
        audit: bool,
    ):
        self.net = Net(model)
        check_scenario(self.net, scenario)
        self.scenario = scenario
        self.audit = audit
        self.trace = Trace()
        self.tokens: dict[int, Token] = {}
        self.next_id = 1
        self.pending: set[tuple[int, int]] = set()
        self.permits: dict[str, int] = {}
        self.cursors: dict[str, int] = {}
        self.inhibits: dict[str, list[str]] = {}
        for c in constraints:
            if isinstance(c, Inhibit):
                self.inhibits.setdefault(c.target, []).append(c.when)
        self.seeds: dict[int, list[str]] = {}
        for stage, tick in scenario.seeds:
            self.seeds.setdefault(tick, []).append(stage)
        self.last_seed = max(self.seeds, default=-1)
        self.root = _Builder(events)(program) if program is not None else None
        self.active: list[_RunExec] = []
        self.gate: Region | None = None
        self.activity = False
        self.inhibited = False

    # -- records ------------------------------------------------------------

    def emit(self, tick: int, kind: str, *subjects: str) -> None:
        self.trace.records.append(Record(tick, kind, subjects))

    def start_event(self, run: _RunExec, tick: int) -> None:
        run.started = True
        run.start_tick = tick
        self.emit(tick, "event-start", run.event)

    def note_activity(self, tick: int, flow: tuple[str, str] | None, stage: str | None,
                      trigger: tuple[str, str] | None) -> None:
        self.activity = True
        for run in self.active:
            region = run.region
            inside = (
                (flow is not None and flow in region.flows)
                or (stage is not None and stage in region.stages)
                or (trigger is not None and trigger in region.triggers)
            )
            if inside:
                if not run.started:
                    self.start_event(run, tick)
                run.executed = True

    # -- tokens -------------------------------------------------------------

    def arrive(self, token: Token, location: str) -> None:
        token.at = location
        if location.endswith(STORAGE_SUFFIX):
            token.dwell = 0
            return
        token.dwell = self.scenario.delays.get(location, 0)
        token.terminal = location in self.net.terminal
        for idx in self.net.triggers_from.get(location, ()):
            self.pending.add((idx, token.id))

    def create(self, tick: int, stage: str) -> Token:
        token = Token(self.next_id, self.net.labels[stage], stage, tick)
        self.next_id += 1
        self.tokens[token.id] = token
        self.emit(tick, "token-created", stage, f"#{token.id}")
        self.arrive(token, stage)
        return token

    def guard_value(self, guard: str) -> bool:
        values = self.scenario.guard_schedule.get(guard, ())
        cursor = self.cursors.get(guard, 0)
        self.cursors[guard] = min(cursor + 1, len(values))
        return bool(values[cursor]) if cursor < len(values) else False

    def is_inhibited(self, stage: str, tick: int) -> bool:
        return any(
            guard_at_tick(self.scenario.guard_schedule, g, tick)
            for g in self.inhibits.get(stage, ())
        )

    def allowed(self, key: tuple[str, str] | None, stage: str, dest: str,
                region: Region | None) -> bool:
        if region is not None:
            if key is None:
                if stage not in region.stages:
                    return False
            elif key not in region.flows:
                return False
        if key is not None and dest in self.net.gated and self.permits.get(dest, 0) <= 0:
            return False
        return True

    # -- phases ---------------------------------------------------------------

    def seed_phase(self, tick: int) -> None:
        for stage in self.seeds.get(tick, ()):
            self.create(tick, stage)
            self.activity = True

    def hop_phase(self, tick: int) -> None:
        for token in list(self.tokens.values()):
            if token.dwell > 0:
                token.dwell -= 1
                continue
            for dest, key, stage in self.net.moves(token.at):
                if not self.allowed(key, stage, dest, self.gate):
                    continue
                if key is not None and self.is_inhibited(dest, tick):
                    self.inhibited = True
                    self.emit(tick, "inhibited", token.at, dest, f"#{token.id}")
                    continue
                if key is not None and dest in self.net.gated:
                    self.permits[dest] -= 1
                self.note_activity(tick, key, stage if key is None else None, None)
                self.emit(tick, "hop", token.at, dest, f"#{token.id}")
                self.arrive(token, dest)
                break

    def trigger_phase(self, tick: int) -> None:
        net = self.net
        for idx, tid in sorted(self.pending):
            arc = net.triggers[idx]
            token = self.tokens[tid]
            if self.gate is not None and arc.key not in self.gate.triggers:
                if token.at != arc.source.path:
                    self.pending.discard((idx, tid))
                continue
            self.pending.discard((idx, tid))
            if arc.guard is not None and not self.guard_value(arc.guard):
                continue
            self.note_activity(tick, None, None, arc.key)
            self.emit(tick, "trigger-fired", arc.source.path, arc.target.path, f"#{tid}")
            target = arc.target.path
            if arc.target.kind == StageKind.CREATE:
                self.create(tick, target)
            else:
                self.permits[target] = self.permits.get(target, 0) + 1

    def has_potential(self, region: Region | None, tick: int) -> bool:
        """Whether anything inside ``region`` (everything when None) can
        still happen without outside help."""
        if any(t > tick for t in self.seeds if region is None or
               any(s in region.stages for s in self.seeds[t])):
            return True
        if region is not None:
            for idx, _ in self.pending:
                if self.net.triggers[idx].key in region.triggers:
                    return True
        for token in self.tokens.values():
            if region is not None and stage_of(token.at) not in region.stages:
                continue
            for dest, key, stage in self.net.moves(token.at):
                if self.allowed(key, stage, dest, region if region is not None else self.gate):
                    return True
        return False

    def bookkeeping(self, tick: int) -> None:
        for run in list(self.active):
            if self.has_potential(run.region, tick):
                continue
            if run.started:
                if tick <= run.start_tick:
                    continue
                self.emit(tick, "event-end", run.event)
            run.state = "done"
            self.active.remove(run)

    def refresh_gate(self) -> None:
        if self.root is None:
            self.gate = None
            return
        region = Region()
        for run in self.active:
            region = region.union(run.region)
        self.gate = region

    # -- audit ------------------------------------------------------------------

    def check(self, phase: str) -> None:
        created = sum(1 for r in self.trace.records if r.kind == "token-created")
        assert created == len(self.tokens), f"token count drifted after {phase}"
        for token in self.tokens.values():
            assert stage_of(token.at) in self.net.stages, f"#{token.id} at unknown {token.at}"
        ids = [t.id for t in self.tokens.values()]
        assert len(ids) == len(set(ids)), f"duplicate token ids after {phase}"

    # -- driver -------------------------------------------------------------------

    def run(self) -> Trace:
        limit = self.scenario.tick_limit
        tick = 0
        while True:
            if self.root is not None and self.root.poll(self, tick):
                return self.finish(tick, "completed")
            if tick >= limit:
                self.finish(tick, "tick-limit")
                raise TickLimitExceeded(self.trace)
            self.refresh_gate()
            self.activity = False
            self.inhibited = False
            self.seed_phase(tick)
            if self.audit:
                self.check("seed")
            self.hop_phase(tick)
            if self.audit:
                self.check("hop")
            self.trigger_phase(tick)
            if self.audit:
                self.check("trigger")
            if self.root is not None:
                self.bookkeeping(tick)
            elif not self.activity and not self.has_potential(None, tick):
                return self.finish(tick + 1, "quiescent")
            tick += 1

    def finish(self, tick: int, reason: str) -> Trace:
        self.trace.end_tick = tick
        self.trace.reason = reason
        self.trace.tokens = list(self.tokens.values())
        return self.trace


def simulate(
    model: Model,
    events: Mapping[str, EventDef] | None = None,
    program: Node | None = None,
    scenario: Scenario | None = None,
    constraints: Iterable[Constraint] = (),
    audit: bool = False,
) -> Trace:
    """Run ``model`` and return its trace.

    With ``program`` the run is controlled: only arcs inside the regions of
    currently active events may fire.  Without it every arc is enabled and
    the run stops after the first tick in which nothing happened and nothing
    is left to happen.  Raises TickLimitExceeded (carrying the partial trace)
    when the scenario's tick limit is reached first.
    """
    sim = _Simulation(model, events or {}, program, scenario or Scenario(), constraints, audit)
    return sim.run()
