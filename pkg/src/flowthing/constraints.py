"""Deadline and inhibition verdicts over a finished trace."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .engine import Scenario, Trace, guard_at_tick
from .errors import UnknownEventName
from .program import Constraint, Deadline, Inhibit


@dataclass(frozen=True)
class Verdict:
    constraint: Constraint
    passed: bool
    # record indices into the trace, or "missing" when a mark never appeared
    witness: tuple[int, ...] | str = ()

    def line(self) -> str:
        return f"{self.constraint}: {'PASS' if self.passed else 'FAIL'}"


def _first(trace: Trace, kind: str, event: str, after: int = -1) -> int | None:
    for i, rec in enumerate(trace.records):
        if i > after and rec.kind == kind and rec.subjects[:1] == (event,):
            return i
    return None


def _deadline(trace: Trace, c: Deadline) -> Verdict:
    start = _first(trace, "event-start", c.first)
    end = None if start is None else _first(trace, "event-end", c.last, start)
    if start is None or end is None:
        return Verdict(c, False, "missing")
    elapsed = trace.records[end].tick - trace.records[start].tick
    if elapsed < c.bound:
        return Verdict(c, True, (start, end))
    return Verdict(c, False, (end,))


def _inhibit(trace: Trace, c: Inhibit, schedule: Mapping[str, list[bool]]) -> Verdict:
    bad = tuple(
        i
        for i, rec in enumerate(trace.records)
        if rec.kind == "hop"
        and rec.subjects[1] == c.target
        and guard_at_tick(schedule, c.when, rec.tick)
    )
    return Verdict(c, not bad, bad)


def check_constraints(
    trace: Trace,
    constraints: Iterable[Constraint],
    events: Mapping | None = None,
    scenario: Scenario | None = None,
) -> list[Verdict]:
    """Evaluate each constraint against ``trace``.

    A deadline measures from the first start of its first event to the
    first end of its last event after that start.  Inhibit verdicts
    re-audit the trace for hops into the target while the guard was true,
    which needs the scenario's guard schedule.  When ``events`` is given,
    deadline names are checked against it.
    """
    schedule = scenario.guard_schedule if scenario is not None else {}
    verdicts = []
    for c in constraints:
        if isinstance(c, Deadline):
            if events is not None:
                for name in (c.first, c.last):
                    if name not in events:
                        raise UnknownEventName(f"deadline names unknown event {name}")
            verdicts.append(_deadline(trace, c))
        elif isinstance(c, Inhibit):
            verdicts.append(_inhibit(trace, c, schedule))
        else:
            raise TypeError(f"not a constraint: {c!r}")
    return verdicts
