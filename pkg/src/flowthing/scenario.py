"""Scenario files: seeds, guard schedules, delays and the tick limit.

One directive per line, ``#`` starts a comment::

    seed Principal.data.create at 0
    guard mismatch = true, false
    delay User.account.receive 20
    limit 500
"""

from __future__ import annotations

import re
from pathlib import Path

from .engine import Scenario
from .errors import ScenarioError

_PATH = r"[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)+"
_SEED = re.compile(rf"seed\s+({_PATH})\s+at\s+(\d+)")
_GUARD = re.compile(r"guard\s+([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)")
_DELAY = re.compile(rf"delay\s+({_PATH})\s+(\d+)")
_LIMIT = re.compile(r"limit\s+(\d+)")
_BOOLS = {"true": True, "false": False}


def parse_scenario(text: str) -> Scenario:
    scenario = Scenario()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _SEED.fullmatch(line):
            scenario.seeds.append((m[1], int(m[2])))
        elif m := _GUARD.fullmatch(line):
            words = [w.strip().lower() for w in m[2].split(",")] if m[2].strip() else []
            if any(w not in _BOOLS for w in words):
                raise ScenarioError(f"guard values must be true or false: {m[2]!r}", lineno)
            scenario.guard_schedule[m[1]] = [_BOOLS[w] for w in words]
        elif m := _DELAY.fullmatch(line):
            scenario.delays[m[1]] = int(m[2])
        elif m := _LIMIT.fullmatch(line):
            scenario.tick_limit = int(m[1])
            if scenario.tick_limit < 1:
                raise ScenarioError("limit must be at least 1", lineno)
        else:
            raise ScenarioError(f"unrecognized directive: {line}", lineno)
    return scenario


def resolve_scenario(name: str, model_path: str | Path) -> Path:
    """A scenario argument is a file path, or a short name looked up as
    ``<model stem>.<name>.scn`` next to the model file."""
    direct = Path(name)
    if direct.is_file():
        return direct
    model_path = Path(model_path)
    candidate = model_path.with_name(f"{model_path.stem}.{name}.scn")
    if candidate.is_file():
        return candidate
    raise FileNotFoundError(f"no scenario {name!r} (looked for {direct} and {candidate})")


def load_scenario(name: str, model_path: str | Path) -> Scenario:
    return parse_scenario(resolve_scenario(name, model_path).read_text())
