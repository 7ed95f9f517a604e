"""Ethical hazard identification for assistive robots.

Guideword-driven examination of robot functions against user
expectations, with an event-sourced session journal, reporting,
and a small facilitation service.
"""

__version__ = "0.1.0"

from .errors import (
    ArgumentError,
    CorruptJournalError,
    DigestMismatchError,
    DuplicateEntryError,
    DuplicateFindingError,
    EhazopError,
    ModelValidationError,
    ParseError,
    ReplayError,
    SessionClosedError,
    UnknownReferenceError,
    UnresolvedHazardError,
    UnsupportedVersionError,
)
from .model import (
    ALL_FUNCTIONS,
    GUIDEWORDS,
    Characteristic,
    CharacteristicKind,
    EnumerationConfig,
    ExaminationCell,
    FunctionClass,
    FunctionSpec,
    GuideWord,
    Subject,
    SubjectShape,
    SystemModel,
    enumerate_cells,
    parse_cell_id,
    validate_model,
)
from .taxonomy import HazardEntry, HazardTaxonomy, Resolution, base_catalog

__all__ = [
    "ALL_FUNCTIONS",
    "ArgumentError",
    "Characteristic",
    "CharacteristicKind",
    "CorruptJournalError",
    "DigestMismatchError",
    "DuplicateEntryError",
    "DuplicateFindingError",
    "EhazopError",
    "EnumerationConfig",
    "ExaminationCell",
    "FunctionClass",
    "FunctionSpec",
    "GUIDEWORDS",
    "GuideWord",
    "HazardEntry",
    "HazardTaxonomy",
    "ModelValidationError",
    "ParseError",
    "ReplayError",
    "Resolution",
    "SessionClosedError",
    "Subject",
    "SubjectShape",
    "SystemModel",
    "UnknownReferenceError",
    "UnresolvedHazardError",
    "UnsupportedVersionError",
    "base_catalog",
    "enumerate_cells",
    "parse_cell_id",
    "validate_model",
    "__version__",
]
