import pytest

from flowthing.constraints import Verdict, check_constraints
from flowthing.engine import Record, Scenario, Trace, simulate
from flowthing.errors import UnknownEventName
from flowthing.program import Deadline, Inhibit
from flowthing.scenario import load_scenario

from conftest import FIXTURES

IT = FIXTURES / "it-dept.fm"

# E1 starts at tick 1 (record 0), E2 ends at tick 4 (record 3)
MARKS = Trace(
    [
        Record(1, "event-start", ("E1",)),
        Record(2, "event-end", ("E1",)),
        Record(3, "event-start", ("E2",)),
        Record(4, "event-end", ("E2",)),
    ],
    5,
    "completed",
)


def test_deadline_pass_and_fail_by_hand():
    ok, late, tight = check_constraints(
        MARKS, [Deadline("E1", "E2", 10), Deadline("E1", "E2", 3), Deadline("E1", "E2", 4)]
    )
    assert ok == Verdict(Deadline("E1", "E2", 10), True, (0, 3))
    assert late == Verdict(Deadline("E1", "E2", 3), False, (3,))
    # elapsed 3 against bound 4 passes; the comparison is strict
    assert tight.passed
    assert check_constraints(MARKS, [Deadline("E1", "E2", 3)])[0].line() == "deadline {E1, E2} < 3: FAIL"


def test_deadline_end_must_follow_the_start():
    trace = Trace([Record(0, "event-end", ("B",)), Record(1, "event-start", ("A",))], 2, "completed")
    assert check_constraints(trace, [Deadline("A", "B", 100)])[0].witness == "missing"


def test_missing_mark():
    verdict = check_constraints(MARKS, [Deadline("E1", "E3", 10)])[0]
    assert not verdict.passed and verdict.witness == "missing"


def test_unknown_event_name():
    with pytest.raises(UnknownEventName) as info:
        check_constraints(MARKS, [Deadline("E1", "E9", 10)], events={"E1": None, "E2": None})
    assert info.value.code == "R003"


def test_inhibit_audit_flags_hops_under_a_true_guard():
    trace = Trace(
        [Record(0, "hop", ("a", "b", "#1")), Record(1, "hop", ("x", "b", "#2")), Record(1, "hop", ("b", "c", "#1"))],
        2,
        "quiescent",
    )
    c = Inhibit("b", "g")
    assert check_constraints(trace, [c], scenario=Scenario(guard_schedule={"g": [False, True]}))[0] == Verdict(
        c, False, (1,)
    )
    assert check_constraints(trace, [c], scenario=Scenario(guard_schedule={"g": [False]}))[0].passed


def run_it(doc, name):
    scenario = load_scenario(name, IT)
    trace = simulate(doc.model, doc.events, doc.controls.get("main"), scenario, doc.constraints)
    return check_constraints(trace, doc.constraints, doc.events, scenario), trace


def test_it_on_time_passes(itdept):
    verdicts, trace = run_it(itdept, "on-time")
    assert verdicts and all(v.passed for v in verdicts)
    deadline = next(v for v in verdicts if isinstance(v.constraint, Deadline))
    start, end = deadline.witness
    assert trace.records[end].tick - trace.records[start].tick < deadline.constraint.bound


def test_it_late_login_fails(itdept):
    verdicts, trace = run_it(itdept, "late-login")
    deadline = next(v for v in verdicts if isinstance(v.constraint, Deadline))
    assert not deadline.passed
    assert deadline.line() == "deadline {Event1, Event2} < 50: FAIL"


def test_it_alarm_inhibits_but_never_violates(itdept):
    verdicts, trace = run_it(itdept, "alarm")
    assert trace.of_kind("inhibited")
    assert all(v.passed for v in verdicts if isinstance(v.constraint, Inhibit))
