"""Canonical .fm text for a model and its declarations."""

from __future__ import annotations

from .events import Region
from .model import Model, Sphere
from .program import Document, format_program

INDENT = "    "


def _sphere_lines(sphere: Sphere, depth: int) -> list[str]:
    pad = INDENT * depth
    lines = [f"{pad}sphere {sphere.name} {{"]
    inner = pad + INDENT
    for thing in sorted(sphere.things):
        lines.append(f"{inner}thing {thing}")
    for name in sorted(sphere.machines):
        m = sphere.machines[name]
        kinds = ", ".join(k.value for k in sorted(m.kinds(), key=lambda k: k.rank))
        line = f"{inner}machine {m.name} carries {m.thing_label} stages {{ {kinds} }}"
        if m.storage_attached:
            stored = ", ".join(k.value for k in sorted(m.storage_attached, key=lambda k: k.rank))
            line += f" storage {{ {stored} }}"
        lines.append(line)
    for name in sorted(sphere.children):
        lines.extend(_sphere_lines(sphere.children[name], depth + 1))
    lines.append(f"{pad}}}")
    return lines


def region_lines(head: str, region: Region) -> list[str]:
    items = sorted(region.stages)
    items += [f"flow {a} -> {b}" for a, b in sorted(region.flows)]
    items += [f"trigger {a} ~> {b}" for a, b in sorted(region.triggers)]
    body = [f"{INDENT}{item}," for item in items]
    if body:
        body[-1] = body[-1][:-1]
    return [f"{head} region {{", *body, "}"]


def serialize(doc: Document | Model) -> str:
    """Render canonical text; parsing it back yields an equal document.

    Spheres, machines, stages and arcs are sorted so that documents that
    differ only in authoring order produce identical bytes.  Events,
    controls and constraints keep declaration order, which is meaningful
    (overlay colors follow it).
    """
    if isinstance(doc, Model):
        doc = Document(model=doc)
    model = doc.model
    sections: list[list[str]] = [[f"model {model.name}"]]
    if model.guards:
        sections.append([f"guard {g}" for g in sorted(model.guards)])
    for name in sorted(model.root_spheres):
        sections.append(_sphere_lines(model.root_spheres[name], 0))
    if model.flows:
        sections.append([f"flow {a} -> {b}" for a, b in sorted(arc.key for arc in model.flows)])
    if model.triggers:
        lines = []
        for arc in sorted(model.triggers, key=lambda a: a.key):
            line = f"trigger {arc.source.path} ~> {arc.target.path}"
            if arc.guard:
                line += f" guard {arc.guard}"
            lines.append(line)
        sections.append(lines)
    for event in doc.events.values():
        head = f"event {event.name}"
        if event.parent:
            head += f" within {event.parent}"
        sections.append(region_lines(head, event.region))
    if doc.controls:
        sections.append([f"control {name} = {format_program(p)}" for name, p in doc.controls.items()])
    if doc.constraints:
        sections.append([f"constraint {c}" for c in doc.constraints])
    return "\n\n".join("\n".join(s) for s in sections) + "\n"
