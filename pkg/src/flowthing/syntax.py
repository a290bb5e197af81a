"""Lexer and recursive-descent parser for .fm source text.

Syntax errors stop the parse at the first offending token.  Construction
errors (dangling references, illegal arcs, duplicates) are collected so one
run reports all of them, each positioned at the element that caused it.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from .errors import Diagnostic, FMError, ParseError
from .events import EventDef, Region
from .model import Model, StageKind, new_model
from .program import Deadline, Document, Inhibit, Node, Par, RepeatIf, Run, Seq

KIND_WORDS = {k.value for k in StageKind}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->)
  | (?P<tarrow>~>)
  | (?P<ident>[A-Za-z][A-Za-z0-9_]*)
  | (?P<int>[0-9]+)
  | (?P<punct>[{}(),.=<])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    value: str
    line: int
    column: int

    @property
    def end_column(self) -> int:
        return self.column + max(len(self.value), 1)

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.value)


class _Stop(Exception):
    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise _Stop(Diagnostic("P001", f"unexpected character {text[pos]!r}", line=line, column=col))
        kind = m.lastgroup
        value = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            if kind == "punct":
                kind = value
            tokens.append(Token(kind, value, line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


@dataclass
class StageRef:
    path: str
    token: Token


@dataclass
class _MachineDecl:
    sphere: str
    name: str
    label: str
    kinds: list[tuple[str, Token]]
    storage: list[tuple[str, Token]]
    token: Token


@dataclass
class _Raw:
    name: str = ""
    spheres: list[tuple[str, Token]] = field(default_factory=list)
    things: list[tuple[str, str, Token]] = field(default_factory=list)
    machines: list[_MachineDecl] = field(default_factory=list)
    guards: list[Token] = field(default_factory=list)
    flows: list[tuple[StageRef, StageRef, Token]] = field(default_factory=list)
    triggers: list[tuple[StageRef, StageRef, Token | None, Token]] = field(default_factory=list)
    events: list[tuple[Token, Token | None, Region]] = field(default_factory=list)
    controls: list[tuple[Token, Node]] = field(default_factory=list)
    constraints: list[tuple[object, Token]] = field(default_factory=list)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.i = 0
        self.raw = _Raw()

    # -- token helpers ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def _fail(self, message: str, token: Token | None = None, code: str = "P002"):
        token = token or self.tok
        raise _Stop(Diagnostic(code, message, line=token.line, column=token.column))

    def advance(self) -> Token:
        token = self.tok
        if token.kind != "eof":
            self.i += 1
        return token

    def at(self, kind: str, value: str | None = None) -> bool:
        t = self.tok
        return t.kind == kind and (value is None or t.value == value)

    def expect(self, kind: str, value: str | None = None) -> Token:
        if not self.at(kind, value):
            wanted = repr(value) if value else ("identifier" if kind == "ident" else repr(kind))
            self._fail(f"expected {wanted}, found {self.tok.describe()}")
        return self.advance()

    def keyword(self, word: str) -> Token:
        return self.expect("ident", word)

    # -- grammar ----------------------------------------------------------

    def parse_file(self) -> _Raw:
        self.keyword("model")
        self.raw.name = self.expect("ident").value
        while not self.at("eof"):
            t = self.tok
            if t.kind != "ident":
                self._fail(f"expected a declaration, found {t.describe()}")
            handler = getattr(self, f"_decl_{t.value}", None)
            if handler is None:
                self._fail(f"unknown declaration {t.value!r}")
            handler()
        return self.raw

    def _decl_sphere(self, prefix: str = "") -> None:
        self.keyword("sphere")
        name = self.expect("ident")
        path = f"{prefix}.{name.value}" if prefix else name.value
        self.raw.spheres.append((path, name))
        self.expect("{")
        while not self.at("}"):
            if self.at("ident", "sphere"):
                self._decl_sphere(path)
            elif self.at("ident", "machine"):
                self._machine(path)
            elif self.at("ident", "thing"):
                self.advance()
                thing = self.expect("ident")
                self.raw.things.append((path, thing.value, thing))
            else:
                self._fail(f"expected sphere, machine or thing, found {self.tok.describe()}")
        self.expect("}")

    def _kind_list(self) -> list[tuple[str, Token]]:
        self.expect("{")
        kinds = [self._kind()]
        while self.at(","):
            self.advance()
            kinds.append(self._kind())
        self.expect("}")
        return kinds

    def _kind(self) -> tuple[str, Token]:
        t = self.expect("ident")
        if t.value not in KIND_WORDS:
            self._fail(f"unknown stage keyword {t.value!r}", t, code="P003")
        return t.value, t

    def _machine(self, sphere: str) -> None:
        self.keyword("machine")
        name = self.expect("ident")
        self.keyword("carries")
        label = self.expect("ident")
        self.keyword("stages")
        kinds = self._kind_list()
        storage: list[tuple[str, Token]] = []
        if self.at("ident", "storage"):
            self.advance()
            storage = self._kind_list()
        self.raw.machines.append(_MachineDecl(sphere, name.value, label.value, kinds, storage, name))

    def _stageref(self) -> StageRef:
        first = self.expect("ident")
        parts = [first]
        while self.at("."):
            self.advance()
            parts.append(self.expect("ident"))
        last = parts[-1]
        if last.value not in KIND_WORDS:
            self._fail(f"unknown stage keyword {last.value!r}", last, code="P003")
        if len(parts) < 3:
            self._fail("stage reference needs sphere.machine.kind", first)
        return StageRef(".".join(p.value for p in parts), first)

    def _decl_flow(self) -> None:
        kw = self.keyword("flow")
        src = self._stageref()
        self.expect("arrow")
        dst = self._stageref()
        self.raw.flows.append((src, dst, kw))

    def _decl_trigger(self) -> None:
        kw = self.keyword("trigger")
        src = self._stageref()
        self.expect("tarrow")
        dst = self._stageref()
        guard = None
        if self.at("ident", "guard"):
            self.advance()
            guard = self.expect("ident")
        self.raw.triggers.append((src, dst, guard, kw))

    def _decl_guard(self) -> None:
        self.keyword("guard")
        self.raw.guards.append(self.expect("ident"))

    def _decl_event(self) -> None:
        self.keyword("event")
        name = self.expect("ident")
        parent = None
        if self.at("ident", "within"):
            self.advance()
            parent = self.expect("ident")
        self.keyword("region")
        self.expect("{")
        stages, flows, triggers = [], [], []
        while True:
            if self.at("ident", "flow") and self.tokens[self.i + 1].kind == "ident":
                self.advance()
                a = self._stageref()
                self.expect("arrow")
                flows.append((a.path, self._stageref().path))
            elif self.at("ident", "trigger") and self.tokens[self.i + 1].kind == "ident":
                self.advance()
                a = self._stageref()
                self.expect("tarrow")
                triggers.append((a.path, self._stageref().path))
            else:
                stages.append(self._stageref().path)
            if self.at(","):
                self.advance()
                continue
            break
        self.expect("}")
        self.raw.events.append((name, parent, Region.of(stages, flows, triggers)))

    def _decl_control(self) -> None:
        self.keyword("control")
        name = self.expect("ident")
        self.expect("=")
        self.raw.controls.append((name, self._cexpr()))

    def _cexpr(self) -> Node:
        t = self.expect("ident")
        if t.value in ("seq", "par", "repeat_if") and self.at("("):
            self.advance()
            if t.value == "repeat_if":
                event = self.expect("ident").value
                self.expect(",")
                body = self._cexpr()
                self.expect(")")
                return RepeatIf(event, body)
            children = [self._cexpr()]
            while self.at(","):
                self.advance()
                children.append(self._cexpr())
            self.expect(")")
            return Seq(tuple(children)) if t.value == "seq" else Par(tuple(children))
        return Run(t.value)

    def _decl_constraint(self) -> None:
        kw = self.keyword("constraint")
        if self.at("ident", "deadline"):
            self.advance()
            self.expect("{")
            first = self.expect("ident").value
            self.expect(",")
            last = self.expect("ident").value
            self.expect("}")
            self.expect("<")
            bound = int(self.expect("int").value)
            self.raw.constraints.append((Deadline(first, last, bound), kw))
        elif self.at("ident", "inhibit"):
            self.advance()
            target = self._stageref().path
            self.keyword("when")
            guard = self.expect("ident").value
            self.raw.constraints.append((Inhibit(target, guard), kw))
        else:
            self._fail(f"expected 'deadline' or 'inhibit', found {self.tok.describe()}")


def _construct(raw: _Raw) -> tuple[Document, list[Diagnostic]]:
    diagnostics: list[Diagnostic] = []
    model = new_model(raw.name)
    doc = Document(model=model)
    pos = doc.positions

    def attempt(token: Token, fn, *args):
        try:
            return fn(*args)
        except FMError as exc:
            diagnostics.append(
                Diagnostic(exc.code, str(exc), line=token.line, column=token.column)
            )
            return None

    for path, token in raw.spheres:
        if attempt(token, model.add_sphere, path) is not None:
            pos[f"sphere:{path}"] = (token.line, token.column)
    for sphere, thing, token in raw.things:
        attempt(token, model.add_thing, sphere, thing)
    for decl in raw.machines:
        seen: set[str] = set()
        bad = False
        for value, token in decl.kinds:
            if value in seen:
                diagnostics.append(Diagnostic(
                    "V003", f"stage kind {value} repeated in machine {decl.sphere}.{decl.name}",
                    line=token.line, column=token.column,
                ))
                bad = True
            seen.add(value)
        for value, token in decl.storage:
            if value not in seen:
                diagnostics.append(Diagnostic(
                    "P004", f"storage on missing stage {value}", line=token.line, column=token.column,
                ))
                bad = True
        if bad:
            continue
        made = attempt(
            decl.token, model.add_machine, decl.sphere, decl.name, decl.label,
            [k for k, _ in decl.kinds], [k for k, _ in decl.storage],
        )
        if made is not None:
            pos[f"machine:{made.path}"] = (decl.token.line, decl.token.column)
    for token in raw.guards:
        if attempt(token, model.add_guard, token.value) is not None:
            pos[f"guard:{token.value}"] = (token.line, token.column)
    for src, dst, kw in raw.flows:
        for ref in (src, dst):
            if model.stage(ref.path) is None:
                diagnostics.append(Diagnostic(
                    "P004", f"unknown stage {ref.path}", line=ref.token.line, column=ref.token.column,
                ))
                break
        else:
            if attempt(src.token, model.add_flow, src.path, dst.path) is not None:
                pos[f"flow:{src.path}->{dst.path}"] = (kw.line, kw.column)
    for src, dst, guard, kw in raw.triggers:
        for ref in (src, dst):
            if model.stage(ref.path) is None:
                diagnostics.append(Diagnostic(
                    "P004", f"unknown stage {ref.path}", line=ref.token.line, column=ref.token.column,
                ))
                break
        else:
            anchor = guard if guard is not None and guard.value not in model.guards else src.token
            made = attempt(anchor, model.add_trigger, src.path, dst.path, guard.value if guard else None)
            if made is not None:
                pos[f"trigger:{src.path}~>{dst.path}"] = (kw.line, kw.column)
    for name, parent, region in raw.events:
        if name.value in doc.events:
            diagnostics.append(Diagnostic(
                "P005", f"duplicate event {name.value}", line=name.line, column=name.column,
            ))
            continue
        doc.events[name.value] = EventDef(name.value, region, parent.value if parent else None)
        pos[f"event:{name.value}"] = (name.line, name.column)
    for name, node in raw.controls:
        if name.value in doc.controls:
            diagnostics.append(Diagnostic(
                "P005", f"duplicate control {name.value}", line=name.line, column=name.column,
            ))
            continue
        doc.controls[name.value] = node
        pos[f"control:{name.value}"] = (name.line, name.column)
    for constraint, kw in raw.constraints:
        pos[f"constraint:{len(doc.constraints)}"] = (kw.line, kw.column)
        doc.constraints.append(constraint)
    return doc, diagnostics


def parse(text: str, origin: str = "<memory>") -> Document:
    """Parse .fm text into a Document, raising ParseError with diagnostics."""
    try:
        raw = _Parser(tokenize(text)).parse_file()
    except _Stop as stop:
        raise ParseError([stop.diagnostic]) from None
    doc, diagnostics = _construct(raw)
    if diagnostics:
        raise ParseError(diagnostics)
    return doc


def parse_file(path: str | Path) -> Document:
    path = Path(path)
    return parse(path.read_text(encoding="utf-8"), origin=str(path))
