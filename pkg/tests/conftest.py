from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from flowthing.syntax import parse_file  # noqa: E402

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "flowthing" / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture(scope="session")
def classroom():
    return parse_file(FIXTURES / "classroom.fm")


@pytest.fixture(scope="session")
def buzzer():
    return parse_file(FIXTURES / "buzzer.fm")


@pytest.fixture(scope="session")
def itdept():
    return parse_file(FIXTURES / "it-dept.fm")
