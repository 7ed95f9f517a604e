"""Deterministic what-if prompt generation for examination cells.

Templates live in an editable data file (one per guideword x subject shape)
so facilitators can re-word prompts without touching code. Slots:

    {guideword}       uppercase prompt form (MORE, LESS, EARLIER, LATER, ...)
    {characteristic}  characteristic id with underscores as spaces
    {CHARACTERISTIC}  same, uppercased
    {function}        '+'-joined sorted function ids

Angle brackets around deviations are part of the template text itself.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from .errors import ArgumentError, ParseError, UnknownReferenceError, UnsupportedVersionError
from .model import ExaminationCell, GuideWord, SubjectShape, SystemModel

TEMPLATES_FORMAT_VERSION = 1

_SLOTS = ("{guideword}", "{characteristic}", "{CHARACTERISTIC}", "{function}")
_CHARACTERISTIC_SLOTS = ("{characteristic}", "{CHARACTERISTIC}")


@dataclass(frozen=True)
class PromptTemplate:
    guideword: GuideWord
    shape: SubjectShape
    text: str
    note: str = ""


class PromptCatalog:
    """Complete template set: exactly one template per (guideword, shape) pair."""

    def __init__(self, templates: list[PromptTemplate]):
        self._by_key: dict[tuple[GuideWord, SubjectShape], PromptTemplate] = {}
        for t in templates:
            key = (t.guideword, t.shape)
            if key in self._by_key:
                raise ArgumentError(f"duplicate template for {t.guideword.value}/{t.shape.value}")
            _check_slots(t)
            self._by_key[key] = t
        for gw in GuideWord:
            for shape in SubjectShape:
                if (gw, shape) not in self._by_key:
                    raise ArgumentError(f"missing template for {gw.value}/{shape.value}")

    def template(self, guideword: GuideWord, shape: SubjectShape) -> PromptTemplate:
        return self._by_key[(guideword, shape)]


def _check_slots(t: PromptTemplate) -> None:
    no_char = t.shape in (SubjectShape.FUNCTION, SubjectShape.FUNCTION_SET)
    if no_char and any(slot in t.text for slot in _CHARACTERISTIC_SLOTS):
        raise ArgumentError(
            f"template {t.guideword.value}/{t.shape.value} uses a characteristic "
            "slot its subject shape cannot fill"
        )
    leftover = t.text
    for slot in _SLOTS:
        leftover = leftover.replace(slot, "")
    if "{" in leftover or "}" in leftover:
        raise ArgumentError(
            f"template {t.guideword.value}/{t.shape.value} contains an unknown slot"
        )


def characteristic_display(characteristic_id: str) -> str:
    return characteristic_id.replace("_", " ")


def load_templates(path=None) -> PromptCatalog:
    """Load a template catalog from a .templates file (package default when omitted)."""
    if path is None:
        raw = resources.files("ehazop.data").joinpath("default.templates").read_text("utf-8")
        source = "<package default.templates>"
    else:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = fh.read()
        except OSError as exc:
            raise ParseError(f"cannot read templates: {exc}", path=str(path)) from exc
        source = str(path)
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid templates file: {exc.msg}", path=source, line=exc.lineno) from exc
    version = doc.get("format_version")
    if version != TEMPLATES_FORMAT_VERSION:
        raise UnsupportedVersionError(f"templates format_version {version!r} not supported")
    templates = []
    for item in doc.get("templates", []):
        try:
            templates.append(
                PromptTemplate(
                    guideword=GuideWord(item["guideword"]),
                    shape=SubjectShape(item["shape"]),
                    text=item["text"],
                    note=item.get("note", ""),
                )
            )
        except (KeyError, ValueError) as exc:
            raise ParseError(f"bad template entry: {exc}", path=source) from exc
    return PromptCatalog(templates)


_default_catalog: PromptCatalog | None = None


def default_catalog() -> PromptCatalog:
    global _default_catalog
    if _default_catalog is None:
        _default_catalog = load_templates()
    return _default_catalog


def generate_prompt(
    cell: ExaminationCell,
    model: SystemModel,
    catalog: PromptCatalog | None = None,
) -> str:
    """Render the guided what-if question for a cell. Pure: same cell, same prompt."""
    known_functions = set(model.function_ids())
    for fid in cell.subject.functions:
        if fid not in known_functions:
            raise UnknownReferenceError(f"function {fid!r} is not in model {model.name!r}")
    char_id = cell.subject.characteristic
    if char_id is not None and char_id not in set(model.characteristic_ids()):
        raise UnknownReferenceError(f"characteristic {char_id!r} is not in model {model.name!r}")
    catalog = catalog or default_catalog()
    template = catalog.template(cell.guideword, cell.subject.shape)
    text = template.text.replace("{guideword}", cell.guideword.prompt_form)
    if char_id is not None:
        display = characteristic_display(char_id)
        text = text.replace("{characteristic}", display)
        text = text.replace("{CHARACTERISTIC}", display.upper())
    if cell.subject.functions:
        text = text.replace("{function}", cell.subject.function_key)
    return text
