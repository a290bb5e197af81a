"""The ``fm`` command.

Exit status: 0 success, 1 diagnostics with at least one error, 2 usage
error, 3 a constraint failed, 4 the tick limit was reached.
"""

from __future__ import annotations

import argparse
import contextlib
import os
import sys
from pathlib import Path
from typing import Sequence, TextIO

from .constraints import check_constraints
from .engine import Scenario, simulate
from .errors import Diagnostic, ParseError, ScenarioError, TickLimitExceeded, UnknownEventName
from .events import eventize
from .export import make_overlay, render_trace, to_dot
from .program import Document
from .scenario import load_scenario
from .serialize import region_lines, serialize
from .syntax import parse_file
from .validate import errors_only, positioned, validate_document

OK, DIAGNOSTICS, USAGE, CONSTRAINT_FAILED, TICK_LIMIT = 0, 1, 2, 3, 4

_RED, _YELLOW, _GREEN, _RESET = "\033[31m", "\033[33m", "\033[32m", "\033[0m"


class _Usage(Exception):
    pass


class _Out:
    def __init__(self, stdout: TextIO, stderr: TextIO, color: bool):
        self.stdout = stdout
        self.stderr = stderr
        self.color = color

    def paint(self, text: str, code: str, stream: TextIO) -> str:
        if self.color and getattr(stream, "isatty", lambda: False)():
            return f"{code}{text}{_RESET}"
        return text

    def diagnostics(self, diagnostics: Sequence[Diagnostic], origin: str) -> None:
        for d in diagnostics:
            line = d.format(origin)
            self.stderr.write(self.paint(line, _RED if d.is_error else _YELLOW, self.stderr) + "\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fm", description="Flowthing model compiler and simulator.")
    parser.add_argument("--no-color", action="store_true", help="never emit ANSI colors")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("parse", help="parse only and report syntax diagnostics")
    p.add_argument("file")
    p.add_argument("--canonical", action="store_true", help="print the canonical serialization")

    p = sub.add_parser("validate", help="parse and validate, reporting rule-code diagnostics")
    p.add_argument("file")

    p = sub.add_parser("events", help="list declared events and eventize candidates")
    p.add_argument("file")

    p = sub.add_parser("export", help="write DOT to standard output")
    p.add_argument("file")
    p.add_argument("--events", action="store_true", help="color top-level event regions")
    p.add_argument(
        "--event", action="append", metavar="NAME", dest="names",
        help="color this event's region (repeatable, implies --events)",
    )
    p.add_argument("-o", "--output", help="write to this file instead of standard output")

    p = sub.add_parser("simulate", help="run the model and print its trace")
    p.add_argument("file")
    p.add_argument("--control", help="control program to run")
    p.add_argument("--scenario", help="scenario file or short name")
    p.add_argument("--free-run", action="store_true", help="ignore control programs")

    p = sub.add_parser("check", help="simulate, then evaluate declared constraints")
    p.add_argument("file")
    p.add_argument("--scenario", help="scenario file or short name")
    p.add_argument("--control", help="control program to run (default: main, when declared)")
    return parser


def _load(path: str, out: _Out) -> Document | None:
    try:
        return parse_file(path)
    except ParseError as exc:
        out.diagnostics(exc.diagnostics, path)
        return None


def _load_valid(path: str, out: _Out) -> Document | None:
    doc = _load(path, out)
    if doc is None:
        return None
    diagnostics = positioned(validate_document(doc), doc.positions)
    out.diagnostics(diagnostics, path)
    return None if errors_only(diagnostics) else doc


def _scenario(args) -> Scenario:
    if not args.scenario:
        return Scenario()
    return load_scenario(args.scenario, args.file)


def _program(doc: Document, name: str | None):
    if name is None:
        return None
    if name not in doc.controls:
        raise _Usage(f"no control program named {name}")
    return doc.controls[name]


def _cmd_parse(args, out: _Out) -> int:
    doc = _load(args.file, out)
    if doc is None:
        return DIAGNOSTICS
    if args.canonical:
        out.stdout.write(serialize(doc))
    return OK


def _cmd_validate(args, out: _Out) -> int:
    return OK if _load_valid(args.file, out) is not None else DIAGNOSTICS


def _cmd_events(args, out: _Out) -> int:
    doc = _load_valid(args.file, out)
    if doc is None:
        return DIAGNOSTICS
    w = out.stdout.write
    w("# declared\n")
    for event in doc.events.values():
        r = event.region
        within = f" within {event.parent}" if event.parent else ""
        w(f"{event.name}{within}: {len(r.stages)} stages, {len(r.flows)} flows, {len(r.triggers)} triggers\n")
    w("\n# candidates\n")
    for i, region in enumerate(eventize(doc.model), 1):
        w("\n".join(region_lines(f"event candidate{i}", region)) + "\n")
    return OK


def _cmd_export(args, out: _Out) -> int:
    doc = _load_valid(args.file, out)
    if doc is None:
        return DIAGNOSTICS
    overlay = None
    if args.events or args.names:
        for n in args.names or ():
            if n not in doc.events:
                raise _Usage(f"no event named {n}")
        overlay = make_overlay(doc.events, args.names)
    text = to_dot(doc.model, overlay)
    if args.output:
        Path(args.output).write_text(text)
    else:
        out.stdout.write(text)
    return OK


def _run(args, doc: Document, control: str | None):
    scenario = _scenario(args)
    program = _program(doc, control)
    return simulate(doc.model, doc.events, program, scenario, doc.constraints), scenario


def _cmd_simulate(args, out: _Out) -> int:
    if args.free_run and args.control:
        raise _Usage("--free-run and --control are mutually exclusive")
    doc = _load_valid(args.file, out)
    if doc is None:
        return DIAGNOSTICS
    try:
        trace, _ = _run(args, doc, None if args.free_run else args.control)
    except TickLimitExceeded as exc:
        out.stdout.write(render_trace(exc.trace))
        out.stderr.write(f"{args.file}: tick limit reached at tick {exc.trace.end_tick}\n")
        return TICK_LIMIT
    out.stdout.write(render_trace(trace))
    return OK


def _cmd_check(args, out: _Out) -> int:
    doc = _load_valid(args.file, out)
    if doc is None:
        return DIAGNOSTICS
    control = args.control or ("main" if "main" in doc.controls else None)
    try:
        trace, scenario = _run(args, doc, control)
    except TickLimitExceeded as exc:
        out.stderr.write(f"{args.file}: tick limit reached at tick {exc.trace.end_tick}\n")
        return TICK_LIMIT
    try:
        verdicts = check_constraints(trace, doc.constraints, doc.events, scenario)
    except UnknownEventName as exc:
        out.stderr.write(f"{args.file}: {exc}\n")
        return DIAGNOSTICS
    for v in verdicts:
        word = "PASS" if v.passed else "FAIL"
        colored = out.paint(word, _GREEN if v.passed else _RED, out.stdout)
        out.stdout.write(f"{v.constraint}: {colored}\n")
    return OK if all(v.passed for v in verdicts) else CONSTRAINT_FAILED


_COMMANDS = {
    "parse": _cmd_parse,
    "validate": _cmd_validate,
    "events": _cmd_events,
    "export": _cmd_export,
    "simulate": _cmd_simulate,
    "check": _cmd_check,
}


def run(argv: Sequence[str] | None = None, stdout: TextIO | None = None, stderr: TextIO | None = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = _build_parser()
    try:
        with contextlib.redirect_stderr(stderr), contextlib.redirect_stdout(stdout):
            args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else USAGE
    out = _Out(stdout, stderr, color=not args.no_color and "NO_COLOR" not in os.environ)
    try:
        return _COMMANDS[args.command](args, out)
    except _Usage as exc:
        parser.print_usage(stderr)
        stderr.write(f"fm: error: {exc}\n")
        return USAGE
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        stderr.write(f"fm: error: {exc}\n")
        return USAGE
    except ScenarioError as exc:
        stderr.write(f"fm: scenario error: {exc}\n")
        return DIAGNOSTICS


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
