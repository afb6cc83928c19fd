"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CsieveError(Exception):
    """Base class for all package errors."""


class DomainError(CsieveError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ResourceError(CsieveError, RuntimeError):
    """A computation would exceed a configured memory or scan budget."""


class SnapshotParseError(CsieveError, ValueError):
    """A snapshot file is malformed; carries the offending line number."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class CheckpointNotFoundError(CsieveError, RuntimeError):
    """No stable checkpoint was found within the verification horizon."""

    def __init__(self, p: int, kmax: int, trace=None):
        super().__init__(f"no stability found up to kmax={kmax} for p={p}")
        self.p = p
        self.kmax = kmax
        self.trace = trace or []


class InvariantViolation(CsieveError, AssertionError):
    """A proven statement failed; indicates an implementation bug."""
