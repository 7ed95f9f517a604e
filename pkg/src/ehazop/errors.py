"""Exception types shared across the ehazop package."""

from __future__ import annotations


class EhazopError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(EhazopError):
    """A caller-supplied argument is malformed (empty name, self-link, ...)."""


class ModelValidationError(EhazopError):
    """A system model or study document violates its invariants.

    Carries the full violation report so callers can surface every problem
    at once instead of fixing them one by one.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        lines = "; ".join(str(v) for v in self.violations)
        super().__init__(f"model validation failed: {lines}")


class UnknownReferenceError(EhazopError):
    """A referenced id (cell, finding, subject, function) does not exist."""


class UnresolvedHazardError(EhazopError):
    """A hazard name matches nothing in the taxonomy; register it first."""

    def __init__(self, name: str):
        self.name = name
        super().__init__(
            f"hazard {name!r} is not in the taxonomy; register it as a novel "
            "hazard before recording the finding"
        )


class DuplicateEntryError(EhazopError):
    """Attempt to register a hazard name that already resolves."""


class DuplicateFindingError(EhazopError):
    """A non-distinct finding collides with an earlier one on its dedup key."""

    def __init__(self, existing_id: str, hazard: str, scope: str):
        self.existing_id = existing_id
        self.hazard = hazard
        self.scope = scope
        super().__init__(
            f"hazard {hazard!r} already recorded for subject {scope!r} as "
            f"{existing_id}; merge notes into it or resubmit with "
            "distinct_presentation=true"
        )


class SessionClosedError(EhazopError):
    """The session journal ends with SESSION_CLOSED; no further events allowed."""


class CorruptJournalError(EhazopError):
    """The journal breaks a structural rule (gap, reorder, bad first event)."""

    def __init__(self, message: str, seq: int | None = None):
        self.seq = seq
        super().__init__(message if seq is None else f"{message} (seq {seq})")


class ReplayError(CorruptJournalError):
    """An event is structurally fine but violates session invariants in place."""


class DigestMismatchError(EhazopError):
    """A journal's study digest does not match the study it is applied to."""


class JournalLockedError(EhazopError):
    """Another process holds the writer lock on the journal file."""


class ParseError(EhazopError):
    """A document or journal file could not be parsed."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = "" if path is None else f" in {path}"
        at = "" if line is None else f" at line {line}"
        super().__init__(f"{message}{where}{at}")


class UnsupportedVersionError(EhazopError):
    """A document declares a format_version this build cannot read."""
