"""Breadth-first state enumeration used as an oracle for the simulator.

Everything here is rebuilt from the model with immutable tuples and a pure
step function; nothing is shared with the simulator's incremental code.
Only free-running (unprogrammed) execution is covered.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .engine import Record, Scenario, Trace, check_scenario, Net
from .errors import StateCapExceeded
from .model import Model, StageKind

# (id, label, location, dwell)
Tok = tuple[int, str, str, int]


@dataclass(frozen=True)
class State:
    tick: int
    tokens: tuple[Tok, ...]
    pending: frozenset[tuple[tuple[str, str], int]]
    permits: tuple[tuple[str, int], ...]
    cursors: tuple[tuple[str, int], ...]
    next_id: int

    def placement(self) -> tuple:
        return tuple((t[0], t[2]) for t in self.tokens), self.cursors


@dataclass
class Exploration:
    states: set
    trace: Trace

    @property
    def state_count(self) -> int:
        return len(self.states)


class _Tables:
    def __init__(self, model: Model):
        machines = {m.path: m for m in model.iter_machines()}
        self.kind = {}
        self.label = {}
        self.parks = set()
        for m in machines.values():
            for s in m.stages:
                self.kind[s.path] = s.kind
                self.label[s.path] = m.thing_label
        succ: dict[str, list[str]] = {p: [] for p in self.kind}
        for f in model.flows:
            succ[f.source.path].append(f.target.path)
        self.succ = {p: tuple(sorted(v)) for p, v in succ.items()}
        for m in machines.values():
            for k in m.storage_attached:
                path = f"{m.path}.{k.value}"
                if not self.succ[path]:
                    self.parks.add(path)
        self.trig = tuple(sorted((t.source.path, t.target.path, t.guard) for t in model.triggers))
        self.gated = frozenset(
            t[1] for t in self.trig if self.kind[t[1]] in (StageKind.RELEASE, StageKind.PROCESS)
        )

    def options(self, loc: str) -> tuple[str, ...]:
        if loc.endswith(".storage"):
            return self.succ[loc[: -len(".storage")]]
        if loc in self.parks:
            return self.succ[loc] + (loc + ".storage",)
        return self.succ[loc]


def _step(tb: _Tables, sc: Scenario, st: State) -> tuple[State, tuple[Record, ...], bool]:
    t = st.tick
    recs: list[Record] = []
    toks = list(st.tokens)
    pending = set(st.pending)
    permits = dict(st.permits)
    cursors = dict(st.cursors)
    nid = st.next_id
    busy = False

    def enter(tid: int, loc: str) -> int:
        if loc.endswith(".storage"):
            return 0
        for src, dst, _ in tb.trig:
            if src == loc:
                pending.add(((src, dst), tid))
        return sc.delays.get(loc, 0)

    for stage, when in sc.seeds:
        if when == t:
            recs.append(Record(t, "token-created", (stage, f"#{nid}")))
            toks.append((nid, tb.label[stage], stage, enter(nid, stage)))
            nid += 1
            busy = True

    for i, (tid, label, loc, dwell) in enumerate(toks):
        if dwell:
            toks[i] = (tid, label, loc, dwell - 1)
            continue
        for dest in tb.options(loc):
            if dest in tb.gated and not dest.endswith(".storage"):
                if permits.get(dest, 0) < 1:
                    continue
                permits[dest] -= 1
            recs.append(Record(t, "hop", (loc, dest, f"#{tid}")))
            toks[i] = (tid, label, dest, enter(tid, dest))
            busy = True
            break

    guards = {(s, d): g for s, d, g in tb.trig}
    for key, tid in sorted(pending):
        pending.discard((key, tid))
        g = guards[key]
        if g is not None:
            sched = sc.guard_schedule.get(g, [])
            c = cursors.get(g, 0)
            cursors[g] = min(c + 1, len(sched))
            if not (c < len(sched) and sched[c]):
                continue
        busy = True
        recs.append(Record(t, "trigger-fired", (key[0], key[1], f"#{tid}")))
        if tb.kind[key[1]] == StageKind.CREATE:
            recs.append(Record(t, "token-created", (key[1], f"#{nid}")))
            toks.append((nid, tb.label[key[1]], key[1], -1))
            nid += 1
        else:
            permits[key[1]] = permits.get(key[1], 0) + 1

    # tokens born from triggers register their activations after the sweep
    for i, (tid, label, loc, dwell) in enumerate(toks):
        if dwell == -1:
            toks[i] = (tid, label, loc, enter(tid, loc))

    nxt = State(
        t + 1,
        tuple(toks),
        frozenset(pending),
        tuple(sorted((k, v) for k, v in permits.items() if v)),
        tuple(sorted(cursors.items())),
        nid,
    )
    return nxt, tuple(recs), busy


def _alive(tb: _Tables, sc: Scenario, st: State) -> bool:
    if any(when >= st.tick for _, when in sc.seeds):
        return True
    permits = dict(st.permits)
    for _, _, loc, _ in st.tokens:
        for dest in tb.options(loc):
            if dest not in tb.gated or dest.endswith(".storage") or permits.get(dest, 0) > 0:
                return True
    return False


def brute_force_explore(model: Model, scenario: Scenario, max_states: int = 100_000) -> Exploration:
    """Enumerate reachable (placement, guard cursor) states breadth first.

    Returns the set of distinct states and the canonical trace.  A run
    cut short by the scenario tick limit returns a trace ending in
    ``tick-limit`` rather than raising.
    """
    check_scenario(Net(model), scenario)
    tb = _Tables(model)
    start = State(0, (), frozenset(), (), (), 1)
    seen = {start.placement()}
    visited = {start}
    trace = Trace()
    queue = deque([start])
    while queue:
        st = queue.popleft()
        if st.tick >= scenario.tick_limit:
            trace.end_tick, trace.reason = st.tick, "tick-limit"
            break
        nxt, recs, busy = _step(tb, scenario, st)
        trace.records.extend(recs)
        seen.add(nxt.placement())
        if len(seen) > max_states:
            raise StateCapExceeded(f"more than {max_states} states")
        if not busy and not _alive(tb, scenario, nxt):
            trace.end_tick, trace.reason = nxt.tick, "quiescent"
            break
        if nxt not in visited:
            visited.add(nxt)
            queue.append(nxt)
    return Exploration(seen, trace)
