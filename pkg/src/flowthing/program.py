"""Control program trees, constraints, and the parsed-document container."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

from .model import Model


@dataclass(frozen=True)
class Run:
    event: str


@dataclass(frozen=True)
class Seq:
    children: tuple[Node, ...]


@dataclass(frozen=True)
class Par:
    children: tuple[Node, ...]


@dataclass(frozen=True)
class RepeatIf:
    """Run ``event``; while it executed, run ``body`` and test again."""

    event: str
    body: Node


Node = Union[Run, Seq, Par, RepeatIf]


def referenced_events(node: Node) -> Iterator[str]:
    if isinstance(node, Run):
        yield node.event
    elif isinstance(node, RepeatIf):
        yield node.event
        yield from referenced_events(node.body)
    else:
        for child in node.children:
            yield from referenced_events(child)


def format_program(node: Node) -> str:
    if isinstance(node, Run):
        return node.event
    if isinstance(node, RepeatIf):
        return f"repeat_if({node.event}, {format_program(node.body)})"
    name = "seq" if isinstance(node, Seq) else "par"
    return f"{name}({', '.join(format_program(c) for c in node.children)})"


@dataclass(frozen=True)
class Deadline:
    first: str
    last: str
    bound: int

    def __str__(self) -> str:
        return f"deadline {{{self.first}, {self.last}}} < {self.bound}"


@dataclass(frozen=True)
class Inhibit:
    target: str
    when: str

    def __str__(self) -> str:
        return f"inhibit {self.target} when {self.when}"


Constraint = Union[Deadline, Inhibit]


@dataclass
class Document:
    """Everything one .fm file declares.

    ``positions`` maps element keys (as produced by the parser) to their
    1-based (line, column) so whole-model diagnostics can be positioned.
    """

    model: Model
    events: dict = field(default_factory=dict)
    controls: dict[str, Node] = field(default_factory=dict)
    constraints: list[Constraint] = field(default_factory=list)
    positions: dict[str, tuple[int, int]] = field(default_factory=dict)
