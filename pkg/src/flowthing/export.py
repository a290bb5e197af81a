"""DOT rendering of models with optional event overlays, plus the stable
text forms of traces and diagnostics."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .engine import Trace
from .errors import Diagnostic
from .events import EventDef, Region, effective_region
from .model import Machine, Model, Sphere

PALETTE = (
    "yellow",
    "orange",
    "lightblue",
    "palegreen",
    "pink",
    "khaki",
    "cyan",
    "lightgray",
)
SHARED = "purple"


@dataclass
class Overlay:
    """Event name -> color, in overlay order, with each event's region."""

    colors: dict[str, str] = field(default_factory=dict)
    regions: dict[str, Region] = field(default_factory=dict)

    def legend(self) -> list[tuple[str, str]]:
        rows = []
        for i, (name, color) in enumerate(self.colors.items()):
            cycle = i // len(PALETTE)
            rows.append((name, f"{color} {cycle + 1}" if cycle else color))
        return rows

    def _members(self, test) -> dict:
        owners: dict = {}
        for name, region in self.regions.items():
            for item in test(region):
                owners.setdefault(item, []).append(name)
        return {k: (SHARED if len(v) > 1 else self.colors[v[0]]) for k, v in owners.items()}

    def stage_colors(self) -> dict[str, str]:
        return self._members(lambda r: r.stages)

    def arc_colors(self) -> dict[tuple[str, str, str], str]:
        return self._members(
            lambda r: [("flow", *k) for k in r.flows] + [("trigger", *k) for k in r.triggers]
        )


def make_overlay(events: Mapping[str, EventDef], names: Sequence[str] | None = None) -> Overlay:
    """Colors follow declaration order.  By default only top-level events
    are colored; a sub-event lies inside its parent and shows that color."""
    if names is None:
        names = [n for n, e in events.items() if e.parent is None]
    overlay = Overlay()
    for i, name in enumerate(names):
        overlay.colors[name] = PALETTE[i % len(PALETTE)]
        overlay.regions[name] = effective_region(name, events)
    return overlay


def _q(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _machine_node(m: Machine, colors: Mapping[str, str], pad: str) -> str:
    cells = []
    for s in m.stages:
        text = s.kind.value + (" (storage)" if s.kind in m.storage_attached else "")
        color = colors.get(s.path)
        bg = f' BGCOLOR="{color}"' if color else ""
        cells.append(f'<TD PORT="{s.kind.value}"{bg}>{text}</TD>')
    head = f'<TR><TD COLSPAN="{max(len(cells), 1)}"><B>{m.name}</B>: {m.thing_label}</TD></TR>'
    body = f"<TR>{''.join(cells)}</TR>" if cells else ""
    table = f'<TABLE BORDER="0" CELLBORDER="1" CELLSPACING="0">{head}{body}</TABLE>'
    return f"{pad}{_q(m.path)} [label=<{table}>];"


def _cluster(sphere: Sphere, colors: Mapping[str, str], depth: int) -> list[str]:
    pad = "  " * depth
    inner = pad + "  "
    lines = [f"{pad}subgraph {_q('cluster_' + sphere.path)} {{", f"{inner}label={_q(sphere.name)};"]
    if sphere.things:
        lines.append(f"{inner}{_q('things_' + sphere.path)} [shape=note, label={_q(', '.join(sorted(sphere.things)))}];")
    for name in sorted(sphere.machines):
        lines.append(_machine_node(sphere.machines[name], colors, inner))
    for name in sorted(sphere.children):
        lines.extend(_cluster(sphere.children[name], colors, depth + 1))
    lines.append(f"{pad}}}")
    return lines


def _endpoint(stage_path: str) -> str:
    machine, kind = stage_path.rsplit(".", 1)
    return f"{_q(machine)}:{_q(kind)}"


def to_dot(model: Model, overlay: Overlay | None = None) -> str:
    """Render ``model`` as a DOT digraph.

    Spheres become nested clusters and each machine one HTML-table node
    with a port per stage.  Flows are solid edges, triggers dashed, with
    guard names as labels.  With an overlay, stage cells and arcs in an
    event region take that event's color, or the shared color when two or
    more overlay events claim them.
    """
    stage_colors = overlay.stage_colors() if overlay else {}
    arc_colors = overlay.arc_colors() if overlay else {}
    lines = [
        f"digraph {_q(model.name)} {{",
        "  graph [rankdir=LR, fontname=Helvetica, compound=true];",
        "  node [shape=plaintext, fontname=Helvetica];",
        "  edge [fontname=Helvetica];",
    ]
    for name in sorted(model.root_spheres):
        lines.extend(_cluster(model.root_spheres[name], stage_colors, 1))
    for a, b in sorted(f.key for f in model.flows):
        attrs = []
        if ("flow", a, b) in arc_colors:
            attrs.append(f"color={arc_colors[('flow', a, b)]}")
        tail = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {_endpoint(a)} -> {_endpoint(b)}{tail};")
    for arc in sorted(model.triggers, key=lambda t: t.key):
        a, b = arc.key
        attrs = ["style=dashed"]
        if arc.guard:
            attrs.append(f"label={_q(arc.guard)}")
        if ("trigger", a, b) in arc_colors:
            attrs.append(f"color={arc_colors[('trigger', a, b)]}")
        lines.append(f"  {_endpoint(a)} -> {_endpoint(b)} [{', '.join(attrs)}];")
    if overlay and overlay.colors:
        rows = [
            f'<TR><TD>{name}</TD><TD BGCOLOR="{overlay.colors[name]}">{label}</TD></TR>'
            for name, label in overlay.legend()
        ]
        if SHARED in stage_colors.values() or SHARED in arc_colors.values():
            rows.append(f'<TR><TD>shared</TD><TD BGCOLOR="{SHARED}">{SHARED}</TD></TR>')
        table = f'<TABLE BORDER="0" CELLBORDER="1" CELLSPACING="0">{"".join(rows)}</TABLE>'
        lines.append(f'  "legend" [label=<{table}>];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def render_trace(trace: Trace) -> str:
    return trace.text()


def render_diagnostics(diagnostics: Iterable[Diagnostic], origin: str) -> str:
    return "".join(d.format(origin) + "\n" for d in diagnostics)
