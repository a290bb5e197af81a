import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowthing.errors import EventError
from flowthing.events import (
    EventDef,
    Region,
    define_event,
    effective_region,
    eventize,
    is_subevent,
    region_wellformed,
)
from flowthing.syntax import parse

from randmodels import random_document

# The four regions of the classroom procedure, typed in from the narrative
# (who acts in each step) rather than read back from the fixture.
P, SP, SD, CP, CD, CC, LS = (
    "Principal.data", "Student.person", "Student.data",
    "Classroom.person", "Classroom.data", "Classroom.compare", "Classroom.Location.sign",
)
HAND_REGIONS = {
    # the principal hands the location data to the student
    "inform": Region.of(
        [f"{P}.create", f"{P}.release", f"{P}.transfer", f"{SD}.receive", f"{SP}.receive"],
        [(f"{P}.create", f"{P}.release"), (f"{P}.release", f"{P}.transfer"),
         (f"{P}.transfer", f"{SD}.receive")],
        [(f"{SP}.receive", f"{P}.create")],
    ),
    # the student walks to the classroom with the data
    "walk": Region.of(
        [f"{SP}.create", f"{SP}.receive", f"{SP}.release", f"{SP}.transfer", f"{CP}.receive",
         f"{SD}.receive", f"{SD}.release", f"{SD}.transfer", f"{CD}.receive"],
        [(f"{SP}.create", f"{SP}.release"), (f"{SP}.receive", f"{SP}.release"),
         (f"{SP}.release", f"{SP}.transfer"), (f"{SP}.transfer", f"{CP}.receive"),
         (f"{SD}.receive", f"{SD}.release"), (f"{SD}.release", f"{SD}.transfer"),
         (f"{SD}.transfer", f"{CD}.receive")],
        [(f"{SD}.receive", f"{SP}.release"), (f"{SP}.release", f"{SD}.release")],
    ),
    # the data is compared with the sign on the door
    "compare": Region.of(
        [f"{CD}.receive", f"{CD}.process", f"{CP}.receive", f"{CC}.create", f"{CC}.process",
         f"{LS}.create", f"{LS}.release"],
        [(f"{CD}.receive", f"{CD}.process"), (f"{CC}.create", f"{CC}.process"),
         (f"{LS}.create", f"{LS}.release")],
        [(f"{CP}.receive", f"{CD}.process"), (f"{CD}.process", f"{CC}.create"),
         (f"{CC}.create", f"{LS}.create")],
    ),
    # on a mismatch the student leaves
    "leave": Region.of(
        [f"{CC}.process", f"{CP}.receive", f"{CP}.release", f"{CP}.transfer", f"{SP}.receive"],
        [(f"{CP}.receive", f"{CP}.release"), (f"{CP}.release", f"{CP}.transfer"),
         (f"{CP}.transfer", f"{SP}.receive")],
        [(f"{CC}.process", f"{CP}.release")],
    ),
}

CHAIN = """\
model M
sphere S {
    machine m carries t stages { create, release, transfer }
}
flow S.m.create -> S.m.release
flow S.m.release -> S.m.transfer
"""


def all_arcs(model):
    return {("flow", a.key) for a in model.flows} | {("trigger", a.key) for a in model.triggers}


def test_fixture_events_match_the_narrative(classroom):
    for fixture_name, hand_name in zip(["E1", "E2", "E3", "E4"], HAND_REGIONS):
        assert classroom.events[fixture_name].region == HAND_REGIONS[hand_name]


def test_event1_region_accepted(classroom):
    event = define_event(classroom.model, "Inform", HAND_REGIONS["inform"])
    assert event.region.stages >= {"Principal.data.create", "Student.data.receive"}


def test_empty_region_is_v009(classroom):
    with pytest.raises(EventError) as info:
        define_event(classroom.model, "Nothing", Region())
    assert info.value.code == "V009"


def test_region_wellformed_examples(classroom):
    model = classroom.model
    assert region_wellformed(model, Region.of(["Principal.data.create"])) is None
    split = Region.of(["Principal.data.create", "Principal.data.transfer"])
    assert region_wellformed(model, split).code == "V008"
    dangling = Region.of(["Principal.data.create"], [("Principal.data.create", "Principal.data.release")])
    assert region_wellformed(model, dangling).code == "V001"


def test_shared_regions_are_allowed(itdept):
    registry = {}
    e1 = define_event(itdept.model, "Event1", itdept.events["Event1"].region, registry=registry)
    e2 = define_event(itdept.model, "Event2", itdept.events["Event2"].region, registry=registry)
    shared = e1.region.stages & e2.region.stages
    assert shared == {"ServerFarm.request.transfer", "ServerFarm.DomainController.request.receive"}


def test_subevent_checks(itdept):
    events = itdept.events
    assert is_subevent(events["AssignComputerName"], events["Event1"])
    assert is_subevent(events["ReceiveIP"], events["Event2"])
    registry = {"Event1": events["Event1"]}
    define_event(itdept.model, "Assign", events["AssignComputerName"].region, "Event1", registry)
    with pytest.raises(EventError) as info:
        define_event(itdept.model, "Wrong", events["ReceiveIP"].region, "Event1", registry)
    assert info.value.code == "V011"
    with pytest.raises(EventError) as info:
        define_event(itdept.model, "Lost", events["ReceiveIP"].region, "Nobody", registry)
    assert info.value.code == "V001"


def test_is_subevent_on_classroom(classroom):
    e = classroom.events
    assert not is_subevent(e["E1"], e["E2"])
    for event in e.values():
        assert is_subevent(event, event)


def test_effective_region_includes_nested_subevents():
    events = {
        "A": EventDef("A", Region.of(["x.y.create"])),
        "B": EventDef("B", Region.of(["x.y.release"]), "A"),
        "C": EventDef("C", Region.of(["x.y.transfer"]), "B"),
    }
    assert effective_region("A", events).stages == {"x.y.create", "x.y.release", "x.y.transfer"}
    assert effective_region("C", events).stages == {"x.y.transfer"}


def test_classroom_candidates_refine_hand_regions(classroom):
    candidates = eventize(classroom.model)
    assert len(candidates) >= 4
    for cand in candidates:
        owners = [name for name, region in HAND_REGIONS.items() if cand.issubset(region)]
        assert len(owners) == 1, (cand, owners)
    union = set()
    for cand in candidates:
        union |= cand.arcs
    assert union == all_arcs(classroom.model)


def test_single_chain_is_one_candidate():
    doc = parse(CHAIN)
    candidates = eventize(doc.model)
    assert len(candidates) == 1
    assert candidates[0].arcs == all_arcs(doc.model)


def test_buzzer_candidates_cover_all_arcs(buzzer):
    union = set()
    for cand in eventize(buzzer.model):
        union |= cand.arcs
    assert union == all_arcs(buzzer.model)


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=0, max_value=2**32))
def test_eventize_partitions_arcs_into_wellformed_regions(seed):
    doc = random_document(random.Random(seed))
    candidates = eventize(doc.model)
    seen = []
    for cand in candidates:
        seen.extend(cand.arcs)
        assert region_wellformed(doc.model, cand) is None
    assert len(seen) == len(set(seen))
    assert set(seen) == all_arcs(doc.model)
    assert eventize(doc.model) == candidates
