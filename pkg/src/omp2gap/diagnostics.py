"""Diagnostic records and the error channel shared by all translator stages."""

from __future__ import annotations

from dataclasses import dataclass

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    """One reportable condition, addressed by 1-based source line."""

    severity: str
    line: int
    message: str

    def render(self, path: str) -> str:
        return f"{path}:{self.line}: {self.severity}: {self.message}"


class DiagnosticError(Exception):
    """Raised where a stage cannot continue.

    exit_code hints the CLI status: 1 for I/O problems, 2 for anything the
    translator rejected (unsupported constructs, parse or planning errors).
    """

    def __init__(self, diagnostic: Diagnostic, exit_code: int = 2):
        super().__init__(diagnostic.message)
        self.diagnostic = diagnostic
        self.exit_code = exit_code


def error(line: int, message: str) -> Diagnostic:
    return Diagnostic(ERROR, line, message)


def warning(line: int, message: str) -> Diagnostic:
    return Diagnostic(WARNING, line, message)


def fail(line: int, message: str, exit_code: int = 2) -> DiagnosticError:
    return DiagnosticError(error(line, message), exit_code)
