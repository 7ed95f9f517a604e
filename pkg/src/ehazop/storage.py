"""File formats and integrity checks: .study, .taxonomy, .journal.

All document files are JSON. Digests are computed over a canonical
serialization (sorted keys, compact separators, raw unicode), so reordering
keys or reflowing whitespace in a file never changes its digest. Journals are
newline-delimited: one header record, then one event record per line, where
line N+1 carries seq N.

Timestamps are stored as UTC ISO 8601 text and never participate in digests.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from pathlib import Path

from .errors import (
    CorruptJournalError,
    DigestMismatchError,
    JournalLockedError,
    ModelValidationError,
    ParseError,
    UnsupportedVersionError,
)
from .model import (
    Characteristic,
    CharacteristicKind,
    EnumerationConfig,
    FunctionClass,
    FunctionSpec,
    SystemModel,
    validate_model,
)
from .taxonomy import EntrySource, HazardEntry, HazardTaxonomy

try:
    import fcntl
except ImportError:  # non-posix; advisory locking degrades to nothing
    fcntl = None

STUDY_FORMAT_VERSION = 1
TAXONOMY_FORMAT_VERSION = 1
JOURNAL_FORMAT_VERSION = 1


def canonical_json(value) -> str:
    """The one true serialization digests are computed over."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def digest_of(value) -> str:
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


# ---------------------------------------------------------------------------
# study documents


def config_to_dict(config: EnumerationConfig) -> dict:
    return {
        "include_single_functions": config.include_single_functions,
        "include_function_pairs": config.include_function_pairs,
        "include_function_characteristic": config.include_function_characteristic,
        "include_generic_characteristic": config.include_generic_characteristic,
    }


def config_from_dict(raw: dict) -> EnumerationConfig:
    if not isinstance(raw, dict):
        raise ParseError("enumeration_config must be an object")
    defaults = EnumerationConfig()
    kwargs = {}
    for name in (
        "include_single_functions",
        "include_function_pairs",
        "include_function_characteristic",
        "include_generic_characteristic",
    ):
        value = raw.get(name, getattr(defaults, name))
        if not isinstance(value, bool):
            raise ParseError(f"enumeration_config.{name} must be a boolean")
        kwargs[name] = value
    return EnumerationConfig(**kwargs)


def model_to_dict(model: SystemModel) -> dict:
    return {
        "name": model.name,
        "functions": [
            {"id": f.id, "function_class": f.function_class.value, "description": f.description}
            for f in model.functions
        ],
        "characteristics": [
            {"id": c.id, "kind": c.kind.value, "description": c.description}
            for c in model.characteristics
        ],
    }


def model_from_dict(raw: dict) -> SystemModel:
    if not isinstance(raw, dict):
        raise ParseError("system must be an object")
    try:
        functions = tuple(
            FunctionSpec(
                id=str(f["id"]),
                function_class=FunctionClass(f.get("function_class", "OTHER")),
                description=str(f.get("description", "")),
            )
            for f in raw.get("functions", [])
        )
        characteristics = tuple(
            Characteristic(
                id=str(c["id"]),
                kind=CharacteristicKind(c.get("kind", "NON_FUNCTIONAL")),
                description=str(c.get("description", "")),
            )
            for c in raw.get("characteristics", [])
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad system model entry: {exc}") from exc
    return SystemModel(
        name=str(raw.get("name", "")),
        functions=functions,
        characteristics=characteristics,
    )


@dataclass(frozen=True)
class StudyDocument:
    """A system model plus the enumeration config it should be examined under."""

    system: SystemModel
    enumeration_config: EnumerationConfig
    format_version: int = STUDY_FORMAT_VERSION

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "system": model_to_dict(self.system),
            "enumeration_config": config_to_dict(self.enumeration_config),
        }

    def digest(self) -> str:
        return digest_of(self.to_dict())


def study_from_dict(raw: dict, validate: bool = True) -> StudyDocument:
    if not isinstance(raw, dict):
        raise ParseError("study document must be an object")
    version = raw.get("format_version")
    if version != STUDY_FORMAT_VERSION:
        raise UnsupportedVersionError(f"study format_version {version!r} not supported")
    if "system" not in raw:
        raise ParseError("study document is missing 'system'")
    system = model_from_dict(raw["system"])
    config = config_from_dict(raw.get("enumeration_config", {}))
    if validate:
        violations = validate_model(system)
        if violations:
            raise ModelValidationError(violations)
    return StudyDocument(system=system, enumeration_config=config)


def load_study(path) -> StudyDocument:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid study file: {exc.msg}", path=str(path), line=exc.lineno) from exc
    return study_from_dict(raw)


def save_study(doc: StudyDocument, path) -> None:
    Path(path).write_text(
        json.dumps(doc.to_dict(), indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


# ---------------------------------------------------------------------------
# taxonomy documents


def taxonomy_to_dict(taxonomy: HazardTaxonomy) -> dict:
    return {
        "format_version": TAXONOMY_FORMAT_VERSION,
        "entries": [
            {
                "canonical_name": e.canonical_name,
                "aliases": sorted(e.aliases),
                "description": e.description,
                "source": e.source.value,
            }
            for e in taxonomy.entries
        ],
    }


def taxonomy_from_dict(raw: dict) -> HazardTaxonomy:
    if not isinstance(raw, dict):
        raise ParseError("taxonomy document must be an object")
    version = raw.get("format_version")
    if version != TAXONOMY_FORMAT_VERSION:
        raise UnsupportedVersionError(f"taxonomy format_version {version!r} not supported")
    entries = []
    try:
        for item in raw.get("entries", []):
            entries.append(
                HazardEntry(
                    canonical_name=str(item["canonical_name"]),
                    source=EntrySource(item.get("source", "BASE_CATALOG")),
                    aliases=frozenset(str(a) for a in item.get("aliases", [])),
                    description=str(item.get("description", "")),
                )
            )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad taxonomy entry: {exc}") from exc
    return HazardTaxonomy(entries)


def load_taxonomy(path) -> HazardTaxonomy:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid taxonomy file: {exc.msg}", path=str(path), line=exc.lineno) from exc
    return taxonomy_from_dict(raw)


def save_taxonomy(taxonomy: HazardTaxonomy, path) -> None:
    Path(path).write_text(
        json.dumps(taxonomy_to_dict(taxonomy), indent=2, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


# ---------------------------------------------------------------------------
# journals


def event_to_record(event) -> dict:
    return {"at": event.at, "kind": event.kind.value, "payload": event.payload, "seq": event.seq}


def event_to_line(event) -> str:
    return canonical_json(event_to_record(event))


def record_to_event(record: dict):
    from .engine import EventKind, SessionEvent

    if not isinstance(record, dict):
        raise ParseError("event record must be an object")
    try:
        return SessionEvent(
            seq=int(record["seq"]),
            kind=EventKind(record["kind"]),
            payload=record.get("payload", {}),
            at=str(record.get("at", "")),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad event record: {exc}") from exc


def journal_header(study: StudyDocument) -> dict:
    return {
        "format_version": JOURNAL_FORMAT_VERSION,
        "study": study.to_dict(),
        "study_digest": study.digest(),
    }


def journal_header_line(study: StudyDocument) -> str:
    return canonical_json(journal_header(study))


@dataclass
class JournalData:
    """Parsed journal: the embedded study, its digest, and all events in order."""

    study: StudyDocument
    study_digest: str
    events: list


def read_journal(path) -> JournalData:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise CorruptJournalError(f"journal {path} is empty")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise CorruptJournalError(f"journal header is not valid JSON: {exc.msg}") from exc
    if not isinstance(header, dict):
        raise CorruptJournalError("journal header must be an object")
    version = header.get("format_version")
    if version != JOURNAL_FORMAT_VERSION:
        raise UnsupportedVersionError(f"journal format_version {version!r} not supported")
    try:
        study = study_from_dict(header.get("study"), validate=True)
    except (ParseError, ModelValidationError, UnsupportedVersionError) as exc:
        raise CorruptJournalError(f"journal study is unusable: {exc}") from exc
    declared = header.get("study_digest")
    actual = study.digest()
    if declared != actual:
        raise DigestMismatchError(
            f"journal header declares study digest {declared!r} but the embedded study hashes to {actual!r}"
        )
    events = []
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            raise CorruptJournalError(f"blank line {line_no} inside journal")
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise CorruptJournalError(f"line {line_no} is not valid JSON: {exc.msg}") from exc
        try:
            event = record_to_event(record)
        except ParseError as exc:
            raise CorruptJournalError(f"line {line_no}: {exc}") from exc
        expected = line_no - 1
        if event.seq != expected:
            raise CorruptJournalError(
                f"line {line_no} should hold seq {expected}, found {event.seq}", seq=event.seq
            )
        events.append(event)
    if not events:
        raise CorruptJournalError(f"journal {path} contains a header but no events")
    return JournalData(study=study, study_digest=actual, events=events)


def _lock_exclusive(fh, path) -> None:
    if fcntl is None:
        return
    try:
        fcntl.flock(fh.fileno(), fcntl.LOCK_EX | fcntl.LOCK_NB)
    except OSError as exc:
        raise JournalLockedError(f"journal {path} is locked by another writer") from exc


class JournalWriter:
    """Single appender for one journal file.

    Holds an exclusive advisory lock for its lifetime. Every append is
    flushed and fsynced before returning, so a crash loses at most the
    event whose append never returned.
    """

    def __init__(self, path, fh, last_seq: int, study: StudyDocument):
        self._path = Path(path)
        self._fh = fh
        self._last_seq = last_seq
        self._study = study

    @classmethod
    def create(cls, path, study: StudyDocument) -> "JournalWriter":
        fh = open(path, "x", encoding="utf-8")
        try:
            _lock_exclusive(fh, path)
            fh.write(journal_header_line(study) + "\n")
            fh.flush()
            os.fsync(fh.fileno())
        except BaseException:
            fh.close()
            raise
        return cls(path, fh, 0, study)

    @classmethod
    def open_append(cls, path) -> tuple["JournalWriter", JournalData]:
        data = read_journal(path)
        fh = open(path, "a", encoding="utf-8")
        try:
            _lock_exclusive(fh, path)
        except BaseException:
            fh.close()
            raise
        return cls(path, fh, data.events[-1].seq, data.study), data

    @property
    def path(self) -> Path:
        return self._path

    @property
    def study(self) -> StudyDocument:
        return self._study

    @property
    def last_seq(self) -> int:
        return self._last_seq

    def append(self, event) -> None:
        if self._fh is None:
            raise CorruptJournalError(f"journal writer for {self._path} is closed")
        if event.seq != self._last_seq + 1:
            raise CorruptJournalError(
                f"append out of order: expected seq {self._last_seq + 1}", seq=event.seq
            )
        self._fh.write(event_to_line(event) + "\n")
        self._fh.flush()
        os.fsync(self._fh.fileno())
        self._last_seq = event.seq

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "JournalWriter":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
