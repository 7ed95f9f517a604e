"""Catalog of known ethical hazard names; novelty is derived by absence from it.

The base catalog ships with the package and is immutable at runtime. During a
session facilitators register hazards the catalog does not know; those resolve
with ``is_novel=True`` and render with a trailing star in every report.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import ArgumentError, DuplicateEntryError

_WS = re.compile(r"\s+")


def normalize(name: str) -> str:
    """Canonical form of a hazard name: trimmed, single-spaced, case-folded, star-stripped."""
    collapsed = _WS.sub(" ", name).strip()
    while collapsed.endswith("*"):
        collapsed = collapsed[:-1].rstrip()
    return collapsed.casefold()


def display_form(name: str) -> str:
    """Surface form preserved for rendering: trimmed and single-spaced, star-stripped."""
    collapsed = _WS.sub(" ", name).strip()
    while collapsed.endswith("*"):
        collapsed = collapsed[:-1].rstrip()
    return collapsed


class EntrySource(Enum):
    BASE_CATALOG = "BASE_CATALOG"
    SESSION_REGISTERED = "SESSION_REGISTERED"


@dataclass(frozen=True)
class HazardEntry:
    canonical_name: str
    source: EntrySource
    aliases: frozenset[str] = frozenset()
    description: str = ""


@dataclass(frozen=True)
class Resolution:
    """Outcome of looking a name up: canonical name plus derived novelty."""

    canonical_name: str | None
    is_novel: bool = False

    @property
    def resolved(self) -> bool:
        return self.canonical_name is not None


@dataclass
class HazardTaxonomy:
    """Hazard name catalog with alias resolution and session registration."""

    entries: list[HazardEntry] = field(default_factory=list)

    def __post_init__(self):
        self._index: dict[str, HazardEntry] = {}
        for entry in self.entries:
            self._index_entry(entry)

    def _index_entry(self, entry: HazardEntry) -> None:
        for key in (entry.canonical_name, *entry.aliases):
            norm = normalize(key)
            if norm in self._index:
                raise DuplicateEntryError(f"hazard name {key!r} collides with an existing entry")
            self._index[norm] = entry

    def resolve(self, name: str) -> Resolution:
        """Match a name (canonical or alias) and derive its novelty flag."""
        if not name or not name.strip():
            raise ArgumentError("hazard name must be non-empty")
        entry = self._index.get(normalize(name))
        if entry is None:
            return Resolution(None)
        return Resolution(entry.canonical_name, entry.source is EntrySource.SESSION_REGISTERED)

    def register_novel(self, name: str, description: str = "") -> HazardEntry:
        """Add a session-registered hazard; the name must not already resolve."""
        if not name or not name.strip():
            raise ArgumentError("hazard name must be non-empty")
        if self.resolve(name).resolved:
            raise DuplicateEntryError(f"hazard {name!r} already resolves; nothing to register")
        entry = HazardEntry(
            canonical_name=normalize(name),
            source=EntrySource.SESSION_REGISTERED,
            description=description,
        )
        self.entries.append(entry)
        self._index_entry(entry)
        return entry

    def session_registered(self) -> list[HazardEntry]:
        return [e for e in self.entries if e.source is EntrySource.SESSION_REGISTERED]

    def copy(self) -> "HazardTaxonomy":
        return HazardTaxonomy(list(self.entries))


#: Hazard names of the bundled base catalog. These are the names reports are
#: checked against; anything else is a novel hazard.
BASE_CATALOG_NAMES: tuple[str, ...] = (
    "lack of privacy",
    "lack of informed consent",
    "loss of human autonomy",
    "loss of human control",
    "dehumanisation",
    "robot addiction",
    "deception",
    "loss of trust",
    "lack of respect for cultural diversity and pluralism",
    "inappropriate trust",
)

#: "Inappropriate trust (deception)" names one hazard presenting through
#: another; it resolves to inappropriate trust, with the parenthetical kept in
#: the finding's surface form.
BASE_CATALOG_ALIASES: dict[str, tuple[str, ...]] = {
    "inappropriate trust": ("inappropriate trust (deception)",),
}


def base_catalog() -> HazardTaxonomy:
    """Fresh taxonomy holding exactly the bundled base catalog."""
    entries = [
        HazardEntry(
            canonical_name=name,
            source=EntrySource.BASE_CATALOG,
            aliases=frozenset(BASE_CATALOG_ALIASES.get(name, ())),
        )
        for name in BASE_CATALOG_NAMES
    ]
    return HazardTaxonomy(entries)
