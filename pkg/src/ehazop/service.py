"""HTTP facade over the engine: versioned commands, reads, and an event stream.

One process hosts any number of studies and sessions. Commands for a session
are serialized under its lock; readers see immutable snapshots; subscribers
receive every journal line exactly once, in seq order, over server-sent
events. Designed for trusted workshop networks: no auth, permissive CORS.
"""

from __future__ import annotations

import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, PlainTextResponse, StreamingResponse

from . import reporting
from .engine import Session
from .errors import (
    ArgumentError,
    CorruptJournalError,
    DigestMismatchError,
    DuplicateEntryError,
    DuplicateFindingError,
    EhazopError,
    JournalLockedError,
    ModelValidationError,
    ParseError,
    SessionClosedError,
    UnknownReferenceError,
    UnresolvedHazardError,
    UnsupportedVersionError,
)
from .prompts import default_catalog, generate_prompt
from .storage import (
    JournalWriter,
    config_from_dict,
    event_to_line,
    journal_header_line,
    load_study,
    read_journal,
    study_from_dict,
)


class ApiError(Exception):
    """Transport-level error envelope; every engine error maps to one code."""

    def __init__(self, code: str, message: str, status: int, details: dict | None = None):
        self.code = code
        self.message = message
        self.status = status
        self.details = details or {}
        super().__init__(message)

    def body(self) -> dict:
        return {"error": {"code": self.code, "message": self.message, "details": self.details}}


def _to_api_error(exc: EhazopError) -> ApiError:
    if isinstance(exc, DuplicateFindingError):
        return ApiError(
            "CONFLICT_DUPLICATE_FINDING",
            str(exc),
            409,
            {"existing_id": exc.existing_id, "hazard": exc.hazard, "scope": exc.scope},
        )
    if isinstance(exc, UnresolvedHazardError):
        return ApiError("UNRESOLVED_HAZARD", str(exc), 422, {"name": exc.name})
    if isinstance(exc, UnknownReferenceError):
        return ApiError("NOT_FOUND", str(exc), 404)
    if isinstance(exc, ModelValidationError):
        return ApiError(
            "VALIDATION", str(exc), 422, {"violations": [str(v) for v in exc.violations]}
        )
    if isinstance(
        exc,
        (ArgumentError, DuplicateEntryError, SessionClosedError, ParseError, UnsupportedVersionError),
    ):
        return ApiError("VALIDATION", str(exc), 422)
    if isinstance(exc, (CorruptJournalError, DigestMismatchError, JournalLockedError)):
        return ApiError("CORRUPT_JOURNAL", str(exc), 500)
    return ApiError("BAD_REQUEST", str(exc), 400)


class LiveSession:
    """A session plus its writer, lock, and idempotency cache."""

    def __init__(self, session_id: str, study_id: str, session: Session, writer: JournalWriter | None):
        self.id = session_id
        self.study_id = study_id
        self.session = session
        self.writer = writer
        self.lock = threading.RLock()
        self.changed = threading.Condition(self.lock)
        self.idempotency: dict[str, tuple[int, dict]] = {}
        self.header_line = journal_header_line(session.study)

    def execute(self, command: str, params: dict, token: str | None) -> tuple[int, dict]:
        with self.lock:
            if token is not None and token in self.idempotency:
                return self.idempotency[token]
            try:
                result = self._dispatch(command, params)
                outcome = (200, {"ok": True, "seq": self.session.last_seq(), "result": result})
                self.changed.notify_all()
            except ApiError as exc:
                outcome = (exc.status, exc.body())
            except EhazopError as exc:
                err = _to_api_error(exc)
                outcome = (err.status, err.body())
            if token is not None:
                self.idempotency[token] = outcome
            return outcome

    def _dispatch(self, command: str, params: dict) -> dict:
        session = self.session
        if command == "open_cell":
            status = session.open_cell(_need_str(params, "cell"))
            return {"cell": params["cell"], "status": status.value}
        if command == "record_finding":
            finding = session.record_finding(
                cell_id=_need_str(params, "cell"),
                hazard=_need_str(params, "hazard"),
                scenario=str(params.get("scenario", "")),
                notes=str(params.get("notes", "")),
                classification=str(params.get("classification", "UNCLASSIFIED")),
                distinct_presentation=bool(params.get("distinct_presentation", False)),
            )
            return finding.to_dict()
        if command == "link_findings":
            link = session.link_findings(
                from_id=_need_str(params, "from"),
                to_id=_need_str(params, "to"),
                relation=_need_str(params, "relation"),
                note=str(params.get("note", "")),
            )
            return link.to_dict()
        if command == "mark_cell":
            status = session.mark_cell(_need_str(params, "cell"), _need_str(params, "status"))
            return {"cell": params["cell"], "status": status.value}
        if command == "register_hazard":
            entry = session.register_hazard(
                _need_str(params, "name"), str(params.get("description", ""))
            )
            return {
                "canonical_name": entry.canonical_name,
                "description": entry.description,
                "source": entry.source.value,
            }
        if command == "add_note":
            note = session.add_note(
                _need_str(params, "text"),
                finding_id=params.get("finding"),
                cell_id=params.get("cell"),
            )
            return note.to_dict()
        if command == "close_session":
            session.close()
            return {"closed": True}
        raise ApiError("BAD_REQUEST", f"unknown command {command!r}", 400)


def _need_str(params: dict, key: str) -> str:
    value = params.get(key)
    if not isinstance(value, str) or not value:
        raise ApiError("BAD_REQUEST", f"command needs a non-empty string {key!r}", 400)
    return value


class ServiceState:
    def __init__(self):
        self.lock = threading.Lock()
        self.studies: dict[str, object] = {}
        self.sessions: dict[str, LiveSession] = {}
        self._counter = 0

    def add_study(self, doc) -> str:
        study_id = doc.digest()
        with self.lock:
            self.studies[study_id] = doc
        return study_id

    def add_session(self, study_id: str, session: Session, writer=None) -> LiveSession:
        with self.lock:
            self._counter += 1
            live = LiveSession(f"s{self._counter}", study_id, session, writer)
            self.sessions[live.id] = live
        return live

    def study(self, study_id: str):
        try:
            return self.studies[study_id]
        except KeyError:
            raise ApiError("NOT_FOUND", f"study {study_id!r} does not exist", 404) from None

    def live(self, session_id: str) -> LiveSession:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise ApiError("NOT_FOUND", f"session {session_id!r} does not exist", 404) from None


def _session_info(live: LiveSession) -> dict:
    session = live.session
    findings = session.findings()
    return {
        "session_id": live.id,
        "study_id": live.study_id,
        "closed": session.closed,
        "cell_count": len(session.cells),
        "findings": len(findings),
        "novel": sum(1 for f in findings if f.is_novel),
        "last_seq": session.last_seq(),
        "journal": str(live.writer.path) if live.writer else None,
    }


def _event_stream(live: LiveSession, from_seq: int, follow: bool):
    if from_seq <= 1:
        yield f"event: header\nid: 0\ndata: {live.header_line}\n\n"
    cursor = max(from_seq, 1)
    while True:
        with live.changed:
            batch = live.session.events()[cursor - 1 :]
            if not batch and follow:
                live.changed.wait(timeout=15.0)
                batch = live.session.events()[cursor - 1 :]
        if batch:
            for event in batch:
                yield f"id: {event.seq}\ndata: {event_to_line(event)}\n\n"
            cursor = batch[-1].seq + 1
        elif follow:
            yield ": keepalive\n\n"
        else:
            return


async def _json_body(request: Request) -> dict:
    try:
        body = await request.json()
    except Exception:
        raise ApiError("BAD_REQUEST", "request body must be JSON", 400) from None
    if not isinstance(body, dict):
        raise ApiError("BAD_REQUEST", "request body must be a JSON object", 400)
    return body


def create_app() -> FastAPI:
    app = FastAPI(title="ehazop", docs_url=None, redoc_url=None, openapi_url=None)
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    state = ServiceState()
    app.state.ehazop = state

    @app.exception_handler(ApiError)
    async def _api_error_handler(_request, exc: ApiError):
        return JSONResponse(status_code=exc.status, content=exc.body())

    @app.post("/v1/studies")
    async def create_study(request: Request):
        body = await _json_body(request)
        try:
            doc = study_from_dict(body, validate=True)
        except EhazopError as exc:
            raise _to_api_error(exc) from exc
        study_id = state.add_study(doc)
        return {"study_id": study_id}

    @app.get("/v1/studies")
    async def list_studies():
        return {
            "studies": [
                {"study_id": sid, "name": doc.system.name}
                for sid, doc in sorted(state.studies.items())
            ]
        }

    @app.get("/v1/studies/{study_id}")
    async def get_study(study_id: str):
        return state.study(study_id).to_dict()

    @app.post("/v1/sessions")
    async def create_session(request: Request):
        body = await _json_body(request)
        study_id = body.get("study_id")
        if not isinstance(study_id, str):
            raise ApiError("BAD_REQUEST", "create_session needs a study_id", 400)
        doc = state.study(study_id)
        config = None
        if "config" in body and body["config"] is not None:
            try:
                config = config_from_dict(body["config"])
            except EhazopError as exc:
                raise _to_api_error(exc) from exc
        try:
            session = Session.start(doc, config=config)
        except EhazopError as exc:
            raise _to_api_error(exc) from exc
        live = state.add_session(study_id, session)
        return {
            "session_id": live.id,
            "study_id": study_id,
            "cell_count": len(session.cells),
        }

    @app.get("/v1/sessions")
    async def list_sessions():
        with state.lock:
            sessions = list(state.sessions.values())
        return {"sessions": [_session_info(live) for live in sessions]}

    @app.get("/v1/sessions/{session_id}")
    async def get_session(session_id: str):
        return _session_info(state.live(session_id))

    @app.post("/v1/sessions/{session_id}/commands")
    async def submit_command(session_id: str, request: Request):
        live = state.live(session_id)
        body = await _json_body(request)
        command = body.get("command")
        if not isinstance(command, str):
            raise ApiError("BAD_REQUEST", "body needs a 'command' string", 400)
        params = body.get("params", {})
        if not isinstance(params, dict):
            raise ApiError("BAD_REQUEST", "'params' must be an object", 400)
        token = body.get("idempotency_token")
        if token is not None and not isinstance(token, str):
            raise ApiError("BAD_REQUEST", "'idempotency_token' must be a string", 400)
        status, payload = live.execute(command, params, token)
        return JSONResponse(status_code=status, content=payload)

    @app.get("/v1/sessions/{session_id}/cells")
    async def list_cells(
        session_id: str,
        guideword: str | None = None,
        subject: str | None = None,
        status: str | None = None,
    ):
        live = state.live(session_id)
        session = live.session
        catalog = default_catalog()
        items = []
        for cell in session.cells:
            cell_status = session.cell_status(cell.id)
            if guideword is not None and cell.guideword.value != guideword:
                continue
            if subject is not None and subject not in (cell.subject.key, cell.subject.group_key):
                continue
            if status is not None and cell_status.value != status:
                continue
            items.append(
                {
                    "id": cell.id,
                    "guideword": cell.guideword.value,
                    "subject": cell.subject.key,
                    "group": cell.subject.group_key,
                    "characteristic": cell.subject.characteristic,
                    "status": cell_status.value,
                    "prompt": generate_prompt(cell, session.model, catalog),
                }
            )
        return {"cells": items}

    @app.get("/v1/sessions/{session_id}/coverage")
    async def get_coverage(session_id: str):
        return state.live(session_id).session.coverage().to_dict()

    @app.get("/v1/sessions/{session_id}/findings")
    async def get_findings(session_id: str):
        session = state.live(session_id).session
        return {"findings": [f.to_dict() for f in session.findings()]}

    @app.get("/v1/sessions/{session_id}/summary")
    async def get_summary(session_id: str):
        return reporting.summary(state.live(session_id).session)

    @app.get("/v1/sessions/{session_id}/report")
    async def get_report(session_id: str, subject: str = "all", format: str = "csv"):
        session = state.live(session_id).session
        try:
            text = reporting.render_report(session, subject, format)
        except EhazopError as exc:
            raise _to_api_error(exc) from exc
        return PlainTextResponse(text)

    @app.get("/v1/sessions/{session_id}/trace")
    async def get_trace(session_id: str, format: str = "json"):
        session = state.live(session_id).session
        graph = reporting.trace_graph(session)
        if format == "json":
            return graph
        if format == "dot":
            return PlainTextResponse(reporting.render_graph_dot(graph))
        if format == "text":
            return PlainTextResponse(reporting.render_graph_text(graph))
        raise ApiError("BAD_REQUEST", f"unknown trace format {format!r}", 400)

    @app.get("/v1/sessions/{session_id}/events")
    async def subscribe_events(session_id: str, from_seq: int = 1, follow: bool = False):
        live = state.live(session_id)
        if from_seq < 1:
            raise ApiError("BAD_REQUEST", "from_seq must be >= 1", 400)
        return StreamingResponse(
            _event_stream(live, from_seq, follow), media_type="text/event-stream"
        )

    return app


def preload(app: FastAPI, path, journal_path=None) -> dict:
    """Load a .study or .journal into a fresh app; returns ids for the banner."""
    state: ServiceState = app.state.ehazop
    path = Path(path)
    if path.suffix == ".journal":
        writer, data = JournalWriter.open_append(path)
        session = Session.replay(data.study, data.events)
        session.attach_sink(writer.append)
        study_id = state.add_study(data.study)
        live = state.add_session(study_id, session, writer)
    else:
        doc = load_study(path)
        writer = None
        if journal_path is not None:
            writer = JournalWriter.create(journal_path, doc)
        session = Session.start(doc, sink=writer.append if writer else None)
        study_id = state.add_study(doc)
        live = state.add_session(study_id, session, writer)
    return {
        "session_id": live.id,
        "study_id": study_id,
        "cell_count": len(live.session.cells),
    }
