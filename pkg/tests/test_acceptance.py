"""The nine acceptance criteria, one test each.

Every test prints a ``PASS criterion N: ...`` or ``FAIL criterion N: ...``
line to the terminal (run with ``-s`` or ``-v`` to see them alongside the
pytest report).
"""

import contextlib
import copy
import io
import random
import time

import pytest

from flowthing.cli import run as fm_run
from flowthing.engine import simulate
from flowthing.errors import TickLimitExceeded
from flowthing.events import eventize
from flowthing.explore import brute_force_explore
from flowthing.model import structurally_equal
from flowthing.scenario import load_scenario
from flowthing.serialize import serialize
from flowthing.syntax import parse, parse_file
from flowthing.validate import errors_only, validate_document

from conftest import FIXTURES, GOLDEN
from invariants import audit
from randmodels import random_document, random_scenario
from test_events import HAND_REGIONS, all_arcs
from test_export import read_dot
from test_validate import MUTATIONS

STEMS = ["classroom", "buzzer", "it-dept"]


@pytest.fixture
def report(capsys):
    @contextlib.contextmanager
    def criterion(n, text):
        start = time.perf_counter()
        try:
            yield
        except BaseException:
            with capsys.disabled():
                print(f"\nFAIL criterion {n}: {text}")
            raise
        with capsys.disabled():
            print(f"\nPASS criterion {n}: {text} ({time.perf_counter() - start:.2f}s)")

    return criterion


def fm(*argv):
    out, err = io.StringIO(), io.StringIO()
    return fm_run(list(argv), out, err), out.getvalue(), err.getvalue()


def free_or_limit(model, scenario):
    try:
        return simulate(model, scenario=scenario)
    except TickLimitExceeded as exc:
        return exc.trace


def test_criterion_1_fixture_fidelity(report):
    with report(1, "fixtures validate with zero diagnostics in under 1 s"):
        start = time.perf_counter()
        results = [fm("validate", str(FIXTURES / f"{stem}.fm")) for stem in STEMS]
        elapsed = time.perf_counter() - start
        assert results == [(0, "", "")] * 3
        assert elapsed < 1.0, elapsed


def test_criterion_2_procedure_reproduction(report, classroom):
    with report(2, "classroom event order and byte-identical golden traces over 10 runs"):
        cases = [
            ("mismatch-once", ["E1", "E2", "E3", "E4", "E1", "E2", "E3"]),
            ("match", ["E1", "E2", "E3"]),
        ]
        for name, order in cases:
            scenario = load_scenario(name, FIXTURES / "classroom.fm")
            golden = (GOLDEN / f"classroom.{name}.main.trace").read_text()
            for _ in range(10):
                trace = simulate(
                    classroom.model, classroom.events, classroom.controls["main"], scenario, classroom.constraints
                )
                assert trace.event_order() == order
                assert trace.reason == "completed"
                assert trace.text() == golden


def test_criterion_3_deadline_semantics(report):
    with report(3, "IT deadline passes on time and fails with exit 3 when login is late"):
        it = str(FIXTURES / "it-dept.fm")
        code, out, _ = fm("check", it, "--scenario", "on-time")
        assert code == 0
        assert "deadline {Event1, Event2} < 50: PASS" in out.splitlines()
        code, out, _ = fm("check", it, "--scenario", "late-login")
        assert code == 3
        assert "deadline {Event1, Event2} < 50: FAIL" in out.splitlines()


def test_criterion_4_region_sharing(report):
    with report(4, "IT overlay has two event colors plus the shared color on the shared sub-region"):
        code, text, _ = fm("export", str(FIXTURES / "it-dept.fm"), "--event", "Event1", "--event", "Event2")
        assert code == 0
        _, _, cells, edges = read_dot(text)
        colors = set(cells.values()) | {c for *_, c in edges if c}
        assert colors == {"yellow", "orange", "purple"}
        shared = {path for path, c in cells.items() if c == "purple"}
        assert shared == {"ServerFarm.request.transfer", "ServerFarm.DomainController.request.receive"}


def test_criterion_5_oracle_equivalence(report):
    with report(5, "simulate equals brute_force_explore on fixtures and 200 random models in under 30 s"):
        start = time.perf_counter()
        checked = 0
        for stem in STEMS:
            doc = parse_file(FIXTURES / f"{stem}.fm")
            for scn in sorted(FIXTURES.glob(f"{stem}.*.scn")):
                scenario = load_scenario(str(scn), FIXTURES / f"{stem}.fm")
                assert free_or_limit(doc.model, scenario).text() == brute_force_explore(doc.model, scenario).trace.text()
                checked += 1
        assert checked == 6
        rng = random.Random(5)
        for _ in range(200):
            doc = random_document(rng, max_machines=6, max_guards=2)
            scenario = random_scenario(rng, doc)
            assert free_or_limit(doc.model, scenario).text() == brute_force_explore(doc.model, scenario).trace.text()
        assert time.perf_counter() - start < 30


def test_criterion_6_invariant_fuzz(report):
    with report(6, "1000 random models, zero invariant violations, under 30 s"):
        start = time.perf_counter()
        rng = random.Random(6)
        violations = []
        for i in range(1000):
            doc = random_document(rng)
            scenario = random_scenario(rng, doc, tick_limit=200)
            controlled = "main" in doc.controls
            try:
                trace = simulate(doc.model, doc.events, doc.controls.get("main"), scenario, doc.constraints)
            except TickLimitExceeded as exc:
                trace = exc.trace
            violations.extend(f"model {i}: {p}" for p in audit(doc, trace, controlled))
        assert violations == []
        assert time.perf_counter() - start < 30


def shuffled_arcs(text, rng):
    lines = text.splitlines(keepends=True)
    slots = [i for i, line in enumerate(lines) if line.startswith(("flow ", "trigger "))]
    picked = [lines[i] for i in slots]
    rng.shuffle(picked)
    for i, line in zip(slots, picked):
        lines[i] = line
    return "".join(lines)


def test_criterion_7_round_trip(report):
    with report(7, "round-trip and canonical bytes on fixtures and 500 random models"):
        rng = random.Random(7)
        docs = [parse_file(FIXTURES / f"{stem}.fm") for stem in STEMS]
        docs += [random_document(rng) for _ in range(500)]
        for doc in docs:
            text = serialize(doc)
            back = parse(text)
            assert structurally_equal(doc.model, back.model)
            assert (back.events, back.controls, back.constraints) == (doc.events, doc.controls, doc.constraints)
            assert serialize(back) == text
            assert serialize(parse(shuffled_arcs(text, rng))) == text


def test_criterion_8_mutation_matrix(report, classroom):
    with report(8, "each mutation V002-V011 yields exactly its rule code"):
        assert sorted(MUTATIONS) == [f"V{n:03d}" for n in range(2, 12)]
        for code, mutate in sorted(MUTATIONS.items()):
            doc = copy.deepcopy(classroom)
            mutate(doc)
            assert {d.code for d in errors_only(validate_document(doc))} == {code}, code


def test_criterion_9_eventize_refinement(report, classroom):
    with report(9, "classroom candidates refine the four hand regions and cover every arc"):
        candidates = eventize(classroom.model)
        for cand in candidates:
            assert sum(cand.issubset(region) for region in HAND_REGIONS.values()) == 1, cand
        union = set()
        for cand in candidates:
            union |= cand.arcs
        assert union == all_arcs(classroom.model)
