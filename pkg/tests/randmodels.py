"""Random well-formed documents and scenarios for fuzzing.

Cross-machine flows and create-targeted triggers only point from lower to
higher machine index, so every generated run terminates.
"""

from __future__ import annotations

import random

from flowthing.engine import Scenario
from flowthing.events import EventDef, Region, eventize, region_wellformed
from flowthing.model import StageKind, flow_violation, new_model
from flowthing.program import Deadline, Document, Inhibit, Par, RepeatIf, Run, Seq
from flowthing.validate import errors_only, validate_document

K = StageKind
_INTAKES = [(), (K.RECEIVE,), (K.ARRIVE,), (K.ARRIVE, K.ACCEPT), (K.ACCEPT,)]
_LABELS = ["item", "signal", "data"]


def _kinds(rng: random.Random) -> list[StageKind]:
    kinds = set(rng.choice(_INTAKES))
    for k, chance in ((K.CREATE, 0.7), (K.PROCESS, 0.5), (K.RELEASE, 0.7), (K.TRANSFER, 0.7)):
        if rng.random() < chance:
            kinds.add(k)
    return sorted(kinds, key=lambda k: k.rank) or [K.TRANSFER]


def random_document(rng: random.Random, max_machines: int = 6, max_guards: int = 2) -> Document:
    model = new_model(f"m{rng.randrange(1000)}")
    spheres = []
    for i in range(rng.randint(1, 3)):
        path = f"S{i}"
        model.add_sphere(path)
        spheres.append(path)
        if rng.random() < 0.4:
            model.add_sphere(f"{path}.Inner")
            spheres.append(f"{path}.Inner")
        if rng.random() < 0.3:
            model.add_thing(path, rng.choice(_LABELS))
    guards = [model.add_guard(f"g{i}") for i in range(rng.randint(0, max_guards))]

    machines = []
    for i in range(rng.randint(1, max_machines)):
        kinds = _kinds(rng)
        storage = [k for k in kinds if rng.random() < 0.15]
        machines.append(model.add_machine(rng.choice(spheres), f"m{i}", rng.choice(_LABELS), kinds, storage))

    for m in machines:
        for a in m.stages:
            for b in m.stages:
                if a != b and flow_violation(a, b) is None and rng.random() < 0.8:
                    model.add_flow(a, b)
    for i, m in enumerate(machines):
        src = m.stage(K.TRANSFER)
        if src is None:
            continue
        for other in machines[i + 1:]:
            for k in (K.TRANSFER, K.ARRIVE, K.RECEIVE):
                dst = other.stage(k)
                if dst is not None and rng.random() < 0.5:
                    model.add_flow(src, dst)

    seen = set()
    for _ in range(rng.randint(0, 5)):
        i = rng.randrange(len(machines))
        src = rng.choice(machines[i].stages)
        j = rng.randrange(len(machines))
        targets = [s for s in machines[j].stages if s.kind in (K.RELEASE, K.PROCESS)]
        if j > i:
            targets += [s for s in machines[j].stages if s.kind == K.CREATE]
        if not targets:
            continue
        dst = rng.choice(targets)
        if (src.path, dst.path) in seen:
            continue
        seen.add((src.path, dst.path))
        guard = rng.choice(guards) if guards and rng.random() < 0.5 else None
        model.add_trigger(src, dst, guard)

    doc = Document(model=model)
    for i, region in enumerate(eventize(model)):
        if region_wellformed(model, region) is None:
            doc.events[f"E{i}"] = EventDef(f"E{i}", region)
    names = list(doc.events)
    if names and rng.random() < 0.3:
        parent = rng.choice(names)
        stage = rng.choice(sorted(doc.events[parent].region.stages))
        doc.events[f"{parent}_sub"] = EventDef(f"{parent}_sub", Region.of([stage]), parent)
    if names:
        doc.controls["main"] = random_program(rng, list(doc.events))
    if len(names) >= 2 and rng.random() < 0.3:
        first, last = rng.sample(names, 2)
        doc.constraints.append(Deadline(first, last, rng.randint(1, 30)))
    if guards and rng.random() < 0.3:
        target = rng.choice([s.path for s in model.iter_stages()])
        doc.constraints.append(Inhibit(target, rng.choice(guards)))
    assert not errors_only(validate_document(doc)), validate_document(doc)
    return doc


def random_program(rng: random.Random, names: list[str], depth: int = 0):
    roll = rng.random()
    if depth >= 2 or roll < 0.35:
        return Run(rng.choice(names))
    if roll < 0.65:
        return Seq(tuple(random_program(rng, names, depth + 1) for _ in range(rng.randint(1, 3))))
    if roll < 0.85:
        return Par(tuple(random_program(rng, names, depth + 1) for _ in range(rng.randint(2, 3))))
    return RepeatIf(rng.choice(names), random_program(rng, names, depth + 1))


def random_scenario(rng: random.Random, doc: Document, tick_limit: int = 200) -> Scenario:
    creates = [s.path for s in doc.model.iter_stages() if s.kind == K.CREATE]
    scenario = Scenario(tick_limit=tick_limit)
    for _ in range(rng.randint(1, 4) if creates else 0):
        scenario.seeds.append((rng.choice(creates), rng.randint(0, 3)))
    for g in sorted(doc.model.guards):
        scenario.guard_schedule[g] = [rng.random() < 0.5 for _ in range(rng.randint(0, 4))]
    stages = [s.path for s in doc.model.iter_stages()]
    for _ in range(rng.randint(0, 2)):
        scenario.delays[rng.choice(stages)] = rng.randint(0, 2)
    return scenario
