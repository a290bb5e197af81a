"""Exception types and the diagnostic record shared by all modules."""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from .engine import Trace


@dataclass(frozen=True)
class Diagnostic:
    """One finding from the parser or the validator.

    ``line``/``column`` are 1-based and set for positioned findings;
    ``element`` names the model element for whole-model findings.
    """

    code: str
    message: str
    severity: str = "error"
    line: int | None = None
    column: int | None = None
    element: str | None = None

    @property
    def is_error(self) -> bool:
        return self.severity == "error"

    def format(self, origin: str = "<memory>") -> str:
        if self.line is not None:
            where = f"{origin}:{self.line}:{self.column}"
        else:
            where = origin
        text = f"{where}: {self.code} {self.message}"
        if self.line is None and self.element:
            text += f" [{self.element}]"
        return text


class FMError(Exception):
    """Base class for model construction and runtime failures."""

    code = "E000"


class InvalidIdentifier(FMError):
    code = "P002"


class DuplicateSphere(FMError):
    code = "P005"


class DuplicateMachine(FMError):
    code = "P005"


class DuplicateArc(FMError):
    code = "P005"


class DuplicateGuard(FMError):
    code = "P005"


class UnknownParent(FMError):
    code = "P004"


class UnknownSphere(FMError):
    code = "P004"


class UnknownStage(FMError):
    code = "P004"


class UnknownGuard(FMError):
    code = "P004"


class MixedReceive(FMError):
    code = "V004"


class DuplicateStageKind(FMError):
    code = "V003"


class IllegalAdjacency(FMError):
    """A flow arc whose kind pair is outside the adjacency table."""

    def __init__(self, source_kind, target_kind, same_machine: bool, code: str = "V002"):
        self.source_kind = source_kind
        self.target_kind = target_kind
        self.same_machine = same_machine
        self.code = code
        where = "same machine" if same_machine else "across machines"
        super().__init__(
            f"illegal flow {source_kind.value} -> {target_kind.value} ({where})"
        )


class IllegalTriggerTarget(FMError):
    code = "V006"


class EventError(FMError):
    """Raised by define_event; carries the offending diagnostic."""

    def __init__(self, diagnostic: Diagnostic):
        self.diagnostic = diagnostic
        self.code = diagnostic.code
        super().__init__(f"{diagnostic.code} {diagnostic.message}")


class ParseError(FMError):
    """Raised when source text does not produce a model."""

    code = "P002"

    def __init__(self, diagnostics: list[Diagnostic]):
        self.diagnostics = diagnostics
        first = diagnostics[0] if diagnostics else None
        super().__init__(first.format() if first else "parse failed")


class TickLimitExceeded(FMError):
    """The run hit its tick limit; ``trace`` holds the partial trace."""

    code = "R001"

    def __init__(self, trace: Trace):
        self.trace = trace
        super().__init__(f"tick limit reached at tick {trace.end_tick}")


class StateCapExceeded(FMError):
    code = "R002"


class UnknownEventName(FMError):
    code = "R003"


class ScenarioError(FMError):
    """A scenario that cannot drive the model (bad seed stage, bad syntax)."""

    code = "S001"

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)
