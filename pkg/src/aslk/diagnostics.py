"""Structured diagnostics shared by every compiler stage."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable


class Severity(str, enum.Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Location:
    file: str = ""
    path: str = ""  # dotted YAML path, e.g. "types[0].is"
    line: int = 0


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    code: str
    message: str
    location: Location = Location()

    @classmethod
    def error(cls, code: str, message: str, location: Location = Location()) -> Diagnostic:
        return cls(Severity.ERROR, code, message, location)

    @classmethod
    def warning(cls, code: str, message: str, location: Location = Location()) -> Diagnostic:
        return cls(Severity.WARNING, code, message, location)

    @property
    def is_error(self) -> bool:
        return self.severity is Severity.ERROR

    def at(self, location: Location) -> Diagnostic:
        """Return a copy of this diagnostic anchored at ``location``."""
        return Diagnostic(self.severity, self.code, self.message, location)

    def format(self) -> str:
        """Render as ``severity code file:line message``."""
        loc = self.location
        where = f"{loc.file or '<input>'}:{loc.line}"
        message = self.message
        if loc.path:
            message = f"{message} (at {loc.path})"
        return f"{self.severity.value} {self.code} {where} {message}"


def has_errors(diagnostics: Iterable[Diagnostic]) -> bool:
    return any(d.is_error for d in diagnostics)


class AslError(Exception):
    """Raised when a stage cannot produce a result.

    Carries every diagnostic collected so far, errors and warnings alike.
    """

    def __init__(self, diagnostics: Diagnostic | Iterable[Diagnostic]):
        if isinstance(diagnostics, Diagnostic):
            diagnostics = [diagnostics]
        self.diagnostics: list[Diagnostic] = list(diagnostics)
        super().__init__("; ".join(d.format() for d in self.diagnostics))

    @property
    def diagnostic(self) -> Diagnostic:
        """The first error (or first diagnostic if there are no errors)."""
        for d in self.diagnostics:
            if d.is_error:
                return d
        return self.diagnostics[0]

    @property
    def codes(self) -> list[str]:
        return [d.code for d in self.diagnostics]
