"""Event-sourced examination sessions.

A session is an append-only list of events over a study. Every command
validates against current state, appends exactly one event, and applies it;
state is always the fold of the event list. Replaying a journal therefore
reconstructs the identical state, byte for byte, including finding ids.

Timestamps on events are informational only. The fold never reads them.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from typing import Callable, Iterable

from .errors import (
    ArgumentError,
    CorruptJournalError,
    DigestMismatchError,
    DuplicateFindingError,
    EhazopError,
    ModelValidationError,
    ReplayError,
    SessionClosedError,
    UnknownReferenceError,
    UnresolvedHazardError,
)
from .model import (
    ALL_FUNCTIONS,
    EnumerationConfig,
    ExaminationCell,
    GuideWord,
    Subject,
    SystemModel,
    enumerate_cells,
    resolve_cell,
    validate_model,
)
from .storage import StudyDocument, config_from_dict, config_to_dict
from .taxonomy import (
    EntrySource,
    HazardEntry,
    HazardTaxonomy,
    base_catalog,
    display_form,
)


class EventKind(Enum):
    SESSION_STARTED = "SESSION_STARTED"
    CELL_OPENED = "CELL_OPENED"
    FINDING_RECORDED = "FINDING_RECORDED"
    FINDING_LINKED = "FINDING_LINKED"
    CELL_MARKED = "CELL_MARKED"
    HAZARD_REGISTERED = "HAZARD_REGISTERED"
    NOTE_ADDED = "NOTE_ADDED"
    SESSION_CLOSED = "SESSION_CLOSED"


class CellStatus(Enum):
    UNEXPLORED = "UNEXPLORED"
    OPEN = "OPEN"
    EXPLORED = "EXPLORED"
    DEFERRED = "DEFERRED"
    NOT_APPLICABLE = "NOT_APPLICABLE"


#: Statuses a facilitator may set directly; OPEN happens via open_cell/findings.
MARKABLE_STATUSES = (CellStatus.EXPLORED, CellStatus.DEFERRED, CellStatus.NOT_APPLICABLE)


class Classification(Enum):
    """Facilitator-asserted judgment of a finding, never computed."""

    SIMPLE = "SIMPLE"
    COMPLEX = "COMPLEX"
    UNCLASSIFIED = "UNCLASSIFIED"


class LinkRelation(Enum):
    REINFORCES = "REINFORCES"
    LEADS_TO = "LEADS_TO"
    PRESENTS_AS = "PRESENTS_AS"
    RELATED = "RELATED"


def now_iso() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


@dataclass(frozen=True)
class SessionEvent:
    seq: int
    kind: EventKind
    payload: dict
    at: str


@dataclass(frozen=True)
class Finding:
    """One accepted ethical hazard identification.

    ``hazard`` is the canonical taxonomy name; ``label`` preserves the surface
    form the facilitator submitted (e.g. a parenthetical qualifier), which is
    what reports render. ``is_novel`` is derived from the taxonomy, never set.
    """

    id: str
    cell_id: str
    guideword: GuideWord
    subject: Subject
    hazard: str
    label: str
    scenario: str
    notes: str
    classification: Classification
    distinct_presentation: bool
    is_novel: bool
    seq: int

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "cell": self.cell_id,
            "guideword": self.guideword.value,
            "subject": self.subject.key,
            "group": self.subject.group_key,
            "hazard": self.hazard,
            "label": self.label,
            "scenario": self.scenario,
            "notes": self.notes,
            "classification": self.classification.value,
            "distinct_presentation": self.distinct_presentation,
            "is_novel": self.is_novel,
            "seq": self.seq,
        }


@dataclass(frozen=True)
class FindingLink:
    from_id: str
    to_id: str
    relation: LinkRelation
    note: str
    seq: int

    def to_dict(self) -> dict:
        return {
            "from": self.from_id,
            "to": self.to_id,
            "relation": self.relation.value,
            "note": self.note,
            "seq": self.seq,
        }


@dataclass(frozen=True)
class Note:
    text: str
    finding_id: str | None
    cell_id: str | None
    seq: int

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "finding": self.finding_id,
            "cell": self.cell_id,
            "seq": self.seq,
        }


def dedup_key(subject: Subject, canonical_hazard: str) -> tuple[str, tuple[str, ...]]:
    """Identity under which duplicate findings collide.

    Deliberately ignores the guideword and the characteristic: a hazard found
    again under another guideword, or under a characteristic twist of the same
    function, is the same hazard. Generic-characteristic subjects collapse to
    the all-functions sentinel scope.
    """
    if subject.is_generic_characteristic:
        scope: tuple[str, ...] = (ALL_FUNCTIONS,)
    else:
        scope = tuple(sorted(subject.functions))
    return (canonical_hazard, scope)


@dataclass(frozen=True)
class Coverage:
    """Exploration status of the whole examination space at one point in time."""

    statuses: dict
    by_guideword: dict
    by_subject: dict
    totals: dict
    cell_count: int
    explored_fraction: float

    def to_dict(self) -> dict:
        return {
            "statuses": {cid: st.value for cid, st in self.statuses.items()},
            "by_guideword": self.by_guideword,
            "by_subject": self.by_subject,
            "totals": self.totals,
            "cell_count": self.cell_count,
            "explored_fraction": self.explored_fraction,
        }


def _taxonomy_payload(taxonomy: HazardTaxonomy) -> list:
    return [
        {
            "canonical_name": e.canonical_name,
            "aliases": sorted(e.aliases),
            "description": e.description,
            "source": e.source.value,
        }
        for e in taxonomy.entries
    ]


def _taxonomy_from_payload(items) -> HazardTaxonomy:
    entries = [
        HazardEntry(
            canonical_name=str(item["canonical_name"]),
            source=EntrySource(item.get("source", "BASE_CATALOG")),
            aliases=frozenset(str(a) for a in item.get("aliases", [])),
            description=str(item.get("description", "")),
        )
        for item in items
    ]
    return HazardTaxonomy(entries)


class Session:
    """A live examination session; all state is the fold of ``events()``.

    Construct through :meth:`start` (new session) or :meth:`replay` (fold an
    existing journal). Commands raise without side effects when invalid; on
    success they append one event and hand it to the attached sink, if any.
    """

    def __init__(self, study: StudyDocument, clock: Callable[[], str] | None = None):
        self._study = study
        self._clock = clock or now_iso
        self._sink: Callable[[SessionEvent], None] | None = None
        self._events: list[SessionEvent] = []
        self._started = False
        self._closed = False
        self._study_digest = ""
        self._config: EnumerationConfig | None = None
        self._cells: tuple[ExaminationCell, ...] = ()
        self._cells_by_id: dict[str, ExaminationCell] = {}
        self._statuses: dict[str, CellStatus] = {}
        self._taxonomy = HazardTaxonomy([])
        self._findings: list[Finding] = []
        self._findings_by_id: dict[str, Finding] = {}
        self._links: list[FindingLink] = []
        self._notes: list[Note] = []
        self._dedup: dict[tuple[str, tuple[str, ...]], str] = {}

    # -- construction -------------------------------------------------------

    @classmethod
    def start(
        cls,
        study: StudyDocument,
        taxonomy: HazardTaxonomy | None = None,
        config: EnumerationConfig | None = None,
        clock: Callable[[], str] | None = None,
        sink: Callable[[SessionEvent], None] | None = None,
    ) -> "Session":
        violations = validate_model(study.system)
        if violations:
            raise ModelValidationError(violations)
        session = cls(study, clock=clock)
        session._sink = sink
        effective = config if config is not None else study.enumeration_config
        starting_taxonomy = taxonomy if taxonomy is not None else base_catalog()
        session._emit(
            EventKind.SESSION_STARTED,
            {
                "study_digest": study.digest(),
                "config": config_to_dict(effective),
                "taxonomy": _taxonomy_payload(starting_taxonomy),
            },
        )
        return session

    @classmethod
    def replay(
        cls,
        study: StudyDocument,
        events: Iterable[SessionEvent],
        clock: Callable[[], str] | None = None,
    ) -> "Session":
        session = cls(study, clock=clock)
        expected = 1
        for event in events:
            if event.seq != expected:
                raise CorruptJournalError(
                    f"expected seq {expected}, found {event.seq}", seq=event.seq
                )
            try:
                session._apply(event)
            except (CorruptJournalError, DigestMismatchError):
                raise
            except EhazopError as exc:
                raise ReplayError(
                    f"event violates session invariants: {exc}", seq=event.seq
                ) from exc
            expected += 1
        if not session._started:
            raise CorruptJournalError("journal contains no SESSION_STARTED event")
        return session

    def attach_sink(self, sink: Callable[[SessionEvent], None] | None) -> None:
        """Receive each accepted event after it is applied (e.g. a journal writer)."""
        self._sink = sink

    # -- commands ------------------------------------------------------------

    def open_cell(self, cell_id: str) -> CellStatus:
        self._emit(EventKind.CELL_OPENED, {"cell": cell_id})
        return self._statuses[cell_id]

    def record_finding(
        self,
        cell_id: str,
        hazard: str,
        scenario: str = "",
        notes: str = "",
        classification: Classification | str = Classification.UNCLASSIFIED,
        distinct_presentation: bool = False,
    ) -> Finding:
        if isinstance(classification, str):
            try:
                classification = Classification(classification)
            except ValueError:
                raise ArgumentError(f"unknown classification {classification!r}") from None
        self._emit(
            EventKind.FINDING_RECORDED,
            {
                "cell": cell_id,
                "name": hazard,
                "scenario": scenario,
                "notes": notes,
                "classification": classification.value,
                "distinct_presentation": bool(distinct_presentation),
            },
        )
        return self._findings[-1]

    def link_findings(
        self,
        from_id: str,
        to_id: str,
        relation: LinkRelation | str,
        note: str = "",
    ) -> FindingLink:
        if isinstance(relation, str):
            try:
                relation = LinkRelation(relation)
            except ValueError:
                raise ArgumentError(f"unknown link relation {relation!r}") from None
        self._emit(
            EventKind.FINDING_LINKED,
            {"from": from_id, "to": to_id, "relation": relation.value, "note": note},
        )
        return self._links[-1]

    def mark_cell(self, cell_id: str, status: CellStatus | str) -> CellStatus:
        if isinstance(status, str):
            try:
                status = CellStatus(status)
            except ValueError:
                raise ArgumentError(f"unknown cell status {status!r}") from None
        self._emit(EventKind.CELL_MARKED, {"cell": cell_id, "status": status.value})
        return self._statuses[cell_id]

    def register_hazard(self, name: str, description: str = "") -> HazardEntry:
        self._emit(EventKind.HAZARD_REGISTERED, {"name": name, "description": description})
        return self._taxonomy.entries[-1]

    def add_note(self, text: str, finding_id: str | None = None, cell_id: str | None = None) -> Note:
        self._emit(EventKind.NOTE_ADDED, {"text": text, "finding": finding_id, "cell": cell_id})
        return self._notes[-1]

    def close(self) -> None:
        self._emit(EventKind.SESSION_CLOSED, {})

    # -- queries -------------------------------------------------------------

    @property
    def study(self) -> StudyDocument:
        return self._study

    @property
    def model(self) -> SystemModel:
        return self._study.system

    @property
    def config(self) -> EnumerationConfig:
        if self._config is None:
            raise CorruptJournalError("session has not started")
        return self._config

    @property
    def study_digest(self) -> str:
        return self._study_digest

    @property
    def closed(self) -> bool:
        return self._closed

    @property
    def cells(self) -> tuple[ExaminationCell, ...]:
        return self._cells

    def cell(self, cell_id: str) -> ExaminationCell:
        return resolve_cell(self._cells_by_id, cell_id)

    def cell_status(self, cell_id: str) -> CellStatus:
        resolve_cell(self._cells_by_id, cell_id)
        return self._statuses[cell_id]

    def events(self) -> tuple[SessionEvent, ...]:
        return tuple(self._events)

    def last_seq(self) -> int:
        return len(self._events)

    @property
    def taxonomy(self) -> HazardTaxonomy:
        """The session's taxonomy; mutate it only through register_hazard."""
        return self._taxonomy

    def findings(self) -> tuple[Finding, ...]:
        return tuple(self._findings)

    def finding(self, finding_id: str) -> Finding:
        try:
            return self._findings_by_id[finding_id]
        except KeyError:
            raise UnknownReferenceError(f"finding {finding_id!r} does not exist") from None

    def subject_groups(self) -> tuple[str, ...]:
        """Reporting groups in enumeration order (each subject's group, deduped)."""
        return tuple(dict.fromkeys(cell.subject.group_key for cell in self._cells))

    def findings_for_subject(self, group_key: str) -> tuple[Finding, ...]:
        if group_key not in set(self.subject_groups()):
            raise UnknownReferenceError(
                f"subject {group_key!r} is not part of this session's examination space"
            )
        return tuple(f for f in self._findings if f.subject.group_key == group_key)

    def links(self) -> tuple[FindingLink, ...]:
        return tuple(self._links)

    def links_for(self, finding_id: str) -> tuple[FindingLink, ...]:
        self.finding(finding_id)
        return tuple(
            l for l in self._links if finding_id in (l.from_id, l.to_id)
        )

    def notes(self) -> tuple[Note, ...]:
        return tuple(self._notes)

    def coverage(self) -> Coverage:
        def zero() -> dict:
            return {status.value: 0 for status in CellStatus}

        totals = zero()
        by_guideword: dict[str, dict] = {}
        by_subject: dict[str, dict] = {}
        for cell in self._cells:
            status = self._statuses[cell.id]
            totals[status.value] += 1
            by_guideword.setdefault(cell.guideword.value, zero())[status.value] += 1
            by_subject.setdefault(cell.subject.key, zero())[status.value] += 1
        count = len(self._cells)
        fraction = (totals[CellStatus.EXPLORED.value] / count) if count else 0.0
        return Coverage(
            statuses=dict(self._statuses),
            by_guideword=by_guideword,
            by_subject=by_subject,
            totals=totals,
            cell_count=count,
            explored_fraction=fraction,
        )

    def snapshot(self) -> dict:
        """Deep, JSON-able image of session state, for equality checks."""
        return {
            "study_digest": self._study_digest,
            "config": config_to_dict(self._config) if self._config else None,
            "closed": self._closed,
            "statuses": {cid: st.value for cid, st in self._statuses.items()},
            "findings": [f.to_dict() for f in self._findings],
            "links": [l.to_dict() for l in self._links],
            "notes": [n.to_dict() for n in self._notes],
            "registered_hazards": [
                {
                    "canonical_name": e.canonical_name,
                    "description": e.description,
                }
                for e in self._taxonomy.session_registered()
            ],
        }

    # -- fold ----------------------------------------------------------------

    def _emit(self, kind: EventKind, payload: dict) -> SessionEvent:
        event = SessionEvent(
            seq=len(self._events) + 1, kind=kind, payload=payload, at=self._clock()
        )
        self._apply(event)
        if self._sink is not None:
            self._sink(event)
        return event

    def _apply(self, event: SessionEvent) -> None:
        if event.seq != len(self._events) + 1:
            raise CorruptJournalError(
                f"expected seq {len(self._events) + 1}", seq=event.seq
            )
        if self._closed:
            raise SessionClosedError("session is closed; no further events allowed")
        if not self._started and event.kind is not EventKind.SESSION_STARTED:
            raise CorruptJournalError("first event must be SESSION_STARTED", seq=event.seq)
        handler = self._HANDLERS[event.kind]
        handler(self, event.payload, event.seq)
        self._events.append(event)

    def _on_session_started(self, payload: dict, seq: int) -> None:
        if self._started:
            raise CorruptJournalError("duplicate SESSION_STARTED", seq=seq)
        declared = payload.get("study_digest")
        actual = self._study.digest()
        if declared != actual:
            raise DigestMismatchError(
                f"journal was recorded against study digest {declared!r}, "
                f"this study hashes to {actual!r}"
            )
        config = config_from_dict(payload.get("config", {}))
        cells = enumerate_cells(self._study.system, config)
        taxonomy = _taxonomy_from_payload(payload.get("taxonomy", []))
        self._config = config
        self._cells = cells
        self._cells_by_id = {cell.id: cell for cell in cells}
        self._statuses = {cell.id: CellStatus.UNEXPLORED for cell in cells}
        self._taxonomy = taxonomy
        self._study_digest = actual
        self._started = True

    def _on_cell_opened(self, payload: dict, seq: int) -> None:
        cell = resolve_cell(self._cells_by_id, str(payload.get("cell")))
        if self._statuses[cell.id] is CellStatus.UNEXPLORED:
            self._statuses[cell.id] = CellStatus.OPEN

    def _on_finding_recorded(self, payload: dict, seq: int) -> None:
        cell = resolve_cell(self._cells_by_id, str(payload.get("cell")))
        name = str(payload.get("name", ""))
        resolution = self._taxonomy.resolve(name)
        if not resolution.resolved:
            raise UnresolvedHazardError(name)
        try:
            classification = Classification(payload.get("classification", "UNCLASSIFIED"))
        except ValueError:
            raise ArgumentError(
                f"unknown classification {payload.get('classification')!r}"
            ) from None
        distinct = bool(payload.get("distinct_presentation", False))
        key = dedup_key(cell.subject, resolution.canonical_name)
        if not distinct and key in self._dedup:
            raise DuplicateFindingError(
                self._dedup[key], resolution.canonical_name, cell.subject.key
            )
        finding = Finding(
            id=f"F{len(self._findings) + 1:02d}",
            cell_id=cell.id,
            guideword=cell.guideword,
            subject=cell.subject,
            hazard=resolution.canonical_name,
            label=display_form(name),
            scenario=str(payload.get("scenario", "")),
            notes=str(payload.get("notes", "")),
            classification=classification,
            distinct_presentation=distinct,
            is_novel=resolution.is_novel,
            seq=seq,
        )
        self._findings.append(finding)
        self._findings_by_id[finding.id] = finding
        if not distinct:
            self._dedup[key] = finding.id
        if self._statuses[cell.id] is CellStatus.UNEXPLORED:
            self._statuses[cell.id] = CellStatus.OPEN

    def _on_finding_linked(self, payload: dict, seq: int) -> None:
        from_id = str(payload.get("from"))
        to_id = str(payload.get("to"))
        if from_id == to_id:
            raise ArgumentError("a finding cannot link to itself")
        for fid in (from_id, to_id):
            if fid not in self._findings_by_id:
                raise UnknownReferenceError(f"finding {fid!r} does not exist")
        try:
            relation = LinkRelation(payload.get("relation"))
        except ValueError:
            raise ArgumentError(f"unknown link relation {payload.get('relation')!r}") from None
        self._links.append(
            FindingLink(
                from_id=from_id,
                to_id=to_id,
                relation=relation,
                note=str(payload.get("note", "")),
                seq=seq,
            )
        )

    def _on_cell_marked(self, payload: dict, seq: int) -> None:
        cell = resolve_cell(self._cells_by_id, str(payload.get("cell")))
        try:
            status = CellStatus(payload.get("status"))
        except ValueError:
            raise ArgumentError(f"unknown cell status {payload.get('status')!r}") from None
        if status not in MARKABLE_STATUSES:
            raise ArgumentError(
                f"cells can only be marked {', '.join(s.value for s in MARKABLE_STATUSES)}"
            )
        self._statuses[cell.id] = status

    def _on_hazard_registered(self, payload: dict, seq: int) -> None:
        self._taxonomy.register_novel(
            str(payload.get("name", "")), str(payload.get("description", ""))
        )

    def _on_note_added(self, payload: dict, seq: int) -> None:
        finding_id = payload.get("finding")
        cell_id = payload.get("cell")
        if finding_id is not None and finding_id not in self._findings_by_id:
            raise UnknownReferenceError(f"finding {finding_id!r} does not exist")
        if cell_id is not None:
            resolve_cell(self._cells_by_id, cell_id)
        text = str(payload.get("text", ""))
        if not text.strip():
            raise ArgumentError("a note needs text")
        self._notes.append(Note(text=text, finding_id=finding_id, cell_id=cell_id, seq=seq))

    def _on_session_closed(self, payload: dict, seq: int) -> None:
        self._closed = True

    _HANDLERS = {
        EventKind.SESSION_STARTED: _on_session_started,
        EventKind.CELL_OPENED: _on_cell_opened,
        EventKind.FINDING_RECORDED: _on_finding_recorded,
        EventKind.FINDING_LINKED: _on_finding_linked,
        EventKind.CELL_MARKED: _on_cell_marked,
        EventKind.HAZARD_REGISTERED: _on_hazard_registered,
        EventKind.NOTE_ADDED: _on_note_added,
        EventKind.SESSION_CLOSED: _on_session_closed,
    }
