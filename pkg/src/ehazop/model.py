"""Vocabulary of a guideword study: guidewords, system models, examination cells.

The examination space is the cross product of the seven fixed guidewords with
the subjects derivable from a system model (single functions, function pairs,
function+characteristic combinations, and generic characteristics). Everything
here is immutable and enumeration is fully deterministic: equal inputs yield
element-wise identical cell lists.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum

from .errors import ArgumentError, ModelValidationError, UnknownReferenceError

#: Sentinel used in cell ids and dedup scopes for "applies to every function".
ALL_FUNCTIONS = "*"

#: Characters that cannot appear in function/characteristic ids because they
#: are structural in cell ids.
RESERVED_ID_CHARS = ("/", "+", "*")


class GuideWord(Enum):
    """The seven deviation guidewords, in catalog order."""

    MORE = "MORE"
    LESS = "LESS"
    EARLY = "EARLY"
    LATE = "LATE"
    OPPOSITE = "OPPOSITE"
    IN_ADDITION = "IN_ADDITION"
    NEVER = "NEVER"

    @property
    def definition(self) -> str:
        return GUIDEWORD_DEFINITIONS[self]

    @property
    def display(self) -> str:
        """Label form used in tables: 'More', 'In addition', ..."""
        return self.value.replace("_", " ").capitalize()

    @property
    def prompt_form(self) -> str:
        """Uppercase form used inside what-if prompts (EARLY/LATE turn comparative)."""
        return _PROMPT_FORMS[self]


GUIDEWORD_DEFINITIONS: dict[GuideWord, str] = {
    GuideWord.MORE: (
        "This characteristic or function of the robot is more or increased "
        "from that expected by the user"
    ),
    GuideWord.LESS: (
        "This characteristic or function of the robot is less or diminished "
        "from that expected by the user"
    ),
    GuideWord.EARLY: (
        "This characteristic or function of the robot occurs or is "
        "encountered earlier than the user expects"
    ),
    GuideWord.LATE: (
        "This characteristic or function of the robot occurs or is "
        "encountered later than the user expects"
    ),
    GuideWord.OPPOSITE: (
        "This characteristic or function of the robot is the opposite of "
        "that expected by the user"
    ),
    GuideWord.IN_ADDITION: (
        "This characteristic or function of the robot is performed or "
        "encountered in addition to a different one expected by the user"
    ),
    GuideWord.NEVER: (
        "This characteristic or function of the robot is not performed or "
        "encountered despite being expected by the user"
    ),
}

_PROMPT_FORMS: dict[GuideWord, str] = {
    GuideWord.MORE: "MORE",
    GuideWord.LESS: "LESS",
    GuideWord.EARLY: "EARLIER",
    GuideWord.LATE: "LATER",
    GuideWord.OPPOSITE: "OPPOSITE",
    GuideWord.IN_ADDITION: "IN ADDITION",
    GuideWord.NEVER: "NEVER",
}

#: Catalog order; the set is closed, no user-defined guidewords.
GUIDEWORDS: tuple[GuideWord, ...] = tuple(GuideWord)


class FunctionClass(Enum):
    COGNITIVE = "COGNITIVE"
    SOCIAL = "SOCIAL"
    COACH = "COACH"
    OTHER = "OTHER"


class CharacteristicKind(Enum):
    NON_FUNCTIONAL = "NON_FUNCTIONAL"
    PHYSICAL_DESIGN = "PHYSICAL_DESIGN"
    AUTONOMY = "AUTONOMY"


@dataclass(frozen=True)
class FunctionSpec:
    """One named robot function under analysis."""

    id: str
    function_class: FunctionClass
    description: str


@dataclass(frozen=True)
class Characteristic:
    """One robot characteristic (non-functional, physical design, or autonomy)."""

    id: str
    kind: CharacteristicKind
    description: str = ""


@dataclass(frozen=True)
class SystemModel:
    """The robot under analysis: an ordered list of functions and characteristics."""

    name: str
    functions: tuple[FunctionSpec, ...]
    characteristics: tuple[Characteristic, ...] = ()

    def function_ids(self) -> tuple[str, ...]:
        return tuple(f.id for f in self.functions)

    def characteristic_ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.characteristics)


@dataclass(frozen=True)
class Violation:
    """One model invariant violation; violations are data, not exceptions."""

    code: str
    subject_id: str
    message: str

    def __str__(self) -> str:
        return f"{self.code}: {self.subject_id}: {self.message}"


def _check_id(owner: str, id_: str, out: list[Violation]) -> None:
    if not id_ or id_.strip() != id_:
        out.append(Violation("invalid-id", repr(id_), f"{owner} id must be non-empty with no surrounding whitespace"))
        return
    for ch in RESERVED_ID_CHARS:
        if ch in id_:
            out.append(Violation("invalid-id", id_, f"{owner} id may not contain {ch!r}"))
    if any(c in "\n\r\t" for c in id_):
        out.append(Violation("invalid-id", id_, f"{owner} id may not contain whitespace control characters"))


def validate_model(model: SystemModel) -> list[Violation]:
    """Check every SystemModel invariant; empty list means the model is valid."""
    violations: list[Violation] = []
    if not model.functions:
        violations.append(Violation("missing-functions", model.name or "<unnamed>", "a model needs at least one function"))
    seen: set[str] = set()
    for fn in model.functions:
        _check_id("function", fn.id, violations)
        if fn.id in seen:
            violations.append(Violation("duplicate-id", fn.id, "id used more than once"))
        seen.add(fn.id)
        if not fn.description.strip():
            violations.append(Violation("empty-description", fn.id, "function description must be non-empty"))
    for ch in model.characteristics:
        _check_id("characteristic", ch.id, violations)
        if ch.id in seen:
            violations.append(Violation("duplicate-id", ch.id, "id used more than once"))
        seen.add(ch.id)
    return violations


class SubjectShape(Enum):
    """Structural shape of a subject; prompt templates are keyed on this."""

    FUNCTION = "FUNCTION"
    FUNCTION_SET = "FUNCTION_SET"
    FUNCTION_PLUS_CHARACTERISTIC = "FUNCTION_PLUS_CHARACTERISTIC"
    GENERIC_CHARACTERISTIC = "GENERIC_CHARACTERISTIC"


@dataclass(frozen=True)
class Subject:
    """What a guideword is applied to: a function set, optionally plus a characteristic.

    An empty function set with a characteristic is a "generic characteristic
    subject" and reads as "this characteristic, considered against every
    function".
    """

    functions: frozenset[str]
    characteristic: str | None = None

    def __post_init__(self):
        if not self.functions and self.characteristic is None:
            raise ArgumentError("a subject needs at least one function or a characteristic")

    @property
    def shape(self) -> SubjectShape:
        if self.is_generic_characteristic:
            return SubjectShape.GENERIC_CHARACTERISTIC
        if self.characteristic is not None:
            return SubjectShape.FUNCTION_PLUS_CHARACTERISTIC
        if len(self.functions) > 1:
            return SubjectShape.FUNCTION_SET
        return SubjectShape.FUNCTION

    @property
    def is_generic_characteristic(self) -> bool:
        return not self.functions

    @property
    def function_key(self) -> str:
        """Sorted '+'-joined function ids, or the all-functions sentinel."""
        if self.is_generic_characteristic:
            return ALL_FUNCTIONS
        return "+".join(sorted(self.functions))

    @property
    def key(self) -> str:
        """Full subject key, e.g. 'Soc1', 'Coa1+Cog1', 'Soc1/autonomy', '*/physical_design'."""
        if self.characteristic is None:
            return self.function_key
        return f"{self.function_key}/{self.characteristic}"

    @property
    def group_key(self) -> str:
        """Reporting group: the function set alone, or '*/<char>' for generic subjects.

        A function+characteristic subject groups with its bare function set, so
        a table for one function carries both its plain rows and its
        characteristic-qualified rows.
        """
        if self.is_generic_characteristic:
            return f"{ALL_FUNCTIONS}/{self.characteristic}"
        return self.function_key


@dataclass(frozen=True)
class ExaminationCell:
    """One unit of analysis: a guideword applied to a subject."""

    guideword: GuideWord
    subject: Subject

    @property
    def id(self) -> str:
        gw = self.guideword.value
        if self.subject.characteristic is None:
            return f"{gw}/{self.subject.function_key}"
        return f"{gw}/{self.subject.function_key}/{self.subject.characteristic}"


def parse_cell_id(cell_id: str) -> ExaminationCell:
    """Invert ExaminationCell.id back into its guideword and subject."""
    parts = cell_id.split("/")
    if len(parts) not in (2, 3):
        raise ArgumentError(f"malformed cell id: {cell_id!r}")
    gw_raw, funcs_raw = parts[0], parts[1]
    try:
        guideword = GuideWord(gw_raw)
    except ValueError:
        raise ArgumentError(f"unknown guideword in cell id: {gw_raw!r}") from None
    characteristic = parts[2] if len(parts) == 3 else None
    if funcs_raw == ALL_FUNCTIONS:
        if characteristic is None:
            raise ArgumentError(f"generic subject needs a characteristic: {cell_id!r}")
        functions: frozenset[str] = frozenset()
    else:
        ids = funcs_raw.split("+")
        if any(not f for f in ids):
            raise ArgumentError(f"empty function id in cell id: {cell_id!r}")
        functions = frozenset(ids)
    return ExaminationCell(guideword, Subject(functions, characteristic))


@dataclass(frozen=True)
class EnumerationConfig:
    """Which subject shapes to include when enumerating the examination space."""

    include_single_functions: bool = True
    include_function_pairs: bool = False
    include_function_characteristic: bool = True
    include_generic_characteristic: bool = True

    def __post_init__(self):
        if not (
            self.include_single_functions
            or self.include_function_pairs
            or self.include_function_characteristic
            or self.include_generic_characteristic
        ):
            raise ArgumentError("enumeration config must enable at least one subject shape")


def _subjects(model: SystemModel, config: EnumerationConfig) -> list[Subject]:
    subjects: list[Subject] = []
    if config.include_single_functions:
        for fn in model.functions:
            subjects.append(Subject(frozenset({fn.id})))
    if config.include_function_pairs:
        for a, b in itertools.combinations(model.functions, 2):
            subjects.append(Subject(frozenset({a.id, b.id})))
    if config.include_function_characteristic:
        for fn in model.functions:
            for ch in model.characteristics:
                subjects.append(Subject(frozenset({fn.id}), ch.id))
    if config.include_generic_characteristic:
        for ch in model.characteristics:
            subjects.append(Subject(frozenset(), ch.id))
    return subjects


def enumerate_cells(model: SystemModel, config: EnumerationConfig | None = None) -> tuple[ExaminationCell, ...]:
    """Enumerate the examination space in deterministic order.

    Guidewords vary in the outer loop (catalog order); subjects in the inner
    loop, in model declaration order: single functions, then function pairs,
    then function x characteristic, then generic characteristics.
    """
    config = config or EnumerationConfig()
    violations = validate_model(model)
    if violations:
        raise ModelValidationError(violations)
    subjects = _subjects(model, config)
    return tuple(
        ExaminationCell(gw, subject) for gw in GUIDEWORDS for subject in subjects
    )


def resolve_cell(cells_by_id: dict[str, ExaminationCell], cell_id: str) -> ExaminationCell:
    """Look up an enumerated cell, raising UnknownReferenceError when absent."""
    try:
        return cells_by_id[cell_id]
    except KeyError:
        raise UnknownReferenceError(f"cell {cell_id!r} is not part of this session's examination space") from None
