import shutil
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

import ehazop
from ehazop.model import parse_cell_id
from ehazop.prompts import default_catalog, generate_prompt
from ehazop.service import create_app, preload
from ehazop.storage import read_journal

GOLDEN_DIR = Path(ehazop.__file__).parent / "data" / "golden"


@pytest.fixture
def client():
    return TestClient(create_app())


@pytest.fixture
def study_id(client, ari_study):
    response = client.post("/v1/studies", json=ari_study.to_dict())
    assert response.status_code == 200
    return response.json()["study_id"]


@pytest.fixture
def session_id(client, study_id):
    response = client.post("/v1/sessions", json={"study_id": study_id})
    assert response.status_code == 200
    return response.json()["session_id"]


@pytest.fixture
def preloaded(tmp_path, bundled_journal_path):
    # preload appends to its journal, so each test gets a private copy
    app = create_app()
    journal = tmp_path / "case.journal"
    shutil.copy(bundled_journal_path, journal)
    info = preload(app, journal)
    client = TestClient(app)
    yield client, info["session_id"], journal
    for live in app.state.ehazop.sessions.values():
        if live.writer is not None:
            live.writer.close()


def run(client, session_id, command, params=None, token=None):
    body = {"command": command, "params": params or {}}
    if token is not None:
        body["idempotency_token"] = token
    return client.post(f"/v1/sessions/{session_id}/commands", json=body)


class TestStudies:
    def test_upload_and_fetch(self, client, ari_study, study_id):
        assert study_id == ari_study.digest()
        fetched = client.get(f"/v1/studies/{study_id}")
        assert fetched.status_code == 200
        assert fetched.json() == ari_study.to_dict()

    def test_upload_is_idempotent(self, client, ari_study, study_id):
        again = client.post("/v1/studies", json=ari_study.to_dict())
        assert again.json()["study_id"] == study_id
        listed = client.get("/v1/studies").json()["studies"]
        assert listed == [{"study_id": study_id, "name": "Ari"}]

    def test_invalid_study_rejected(self, client, ari_study):
        raw = ari_study.to_dict()
        raw["system"]["functions"] = []
        response = client.post("/v1/studies", json=raw)
        assert response.status_code == 422
        error = response.json()["error"]
        assert error["code"] == "VALIDATION"
        assert error["details"]["violations"]

    def test_unsupported_version_rejected(self, client, ari_study):
        raw = ari_study.to_dict()
        raw["format_version"] = 3
        assert client.post("/v1/studies", json=raw).status_code == 422

    def test_unknown_study_404(self, client):
        response = client.get("/v1/studies/feedbeef")
        assert response.status_code == 404
        assert response.json()["error"]["code"] == "NOT_FOUND"

    def test_non_object_body_rejected(self, client):
        response = client.post("/v1/studies", content=b"[]", headers={"content-type": "application/json"})
        assert response.status_code == 400


class TestSessions:
    def test_create_uses_study_config(self, client, session_id):
        info = client.get(f"/v1/sessions/{session_id}").json()
        assert info["cell_count"] == 77
        assert info["closed"] is False
        assert info["last_seq"] == 1
        assert info["findings"] == 0

    def test_config_override(self, client, study_id):
        response = client.post(
            "/v1/sessions",
            json={
                "study_id": study_id,
                "config": {
                    "include_function_characteristic": False,
                    "include_generic_characteristic": False,
                },
            },
        )
        assert response.json()["cell_count"] == 21

    def test_all_off_config_rejected(self, client, study_id):
        response = client.post(
            "/v1/sessions",
            json={
                "study_id": study_id,
                "config": {
                    "include_single_functions": False,
                    "include_function_pairs": False,
                    "include_function_characteristic": False,
                    "include_generic_characteristic": False,
                },
            },
        )
        assert response.status_code == 422

    def test_unknown_study(self, client):
        response = client.post("/v1/sessions", json={"study_id": "nope"})
        assert response.status_code == 404

    def test_missing_study_id(self, client):
        assert client.post("/v1/sessions", json={}).status_code == 400

    def test_listing(self, client, session_id):
        sessions = client.get("/v1/sessions").json()["sessions"]
        assert [s["session_id"] for s in sessions] == [session_id]

    def test_unknown_session_404(self, client):
        for path in ("", "/cells", "/coverage", "/findings", "/summary", "/report", "/trace", "/events"):
            assert client.get(f"/v1/sessions/shadow{path}").status_code == 404


class TestCommands:
    def test_open_then_record(self, client, session_id):
        response = run(client, session_id, "open_cell", {"cell": "MORE/Soc1"})
        assert response.status_code == 200
        assert response.json() == {"ok": True, "seq": 2, "result": {"cell": "MORE/Soc1", "status": "OPEN"}}
        response = run(
            client, session_id, "record_finding",
            {"cell": "MORE/Soc1", "hazard": "Lack of privacy", "scenario": "s", "classification": "SIMPLE"},
        )
        body = response.json()
        assert body["result"]["id"] == "F01"
        assert body["result"]["is_novel"] is False
        assert body["seq"] == 3

    def test_duplicate_conflict_shape(self, client, session_id):
        run(client, session_id, "record_finding", {"cell": "MORE/Soc1", "hazard": "Lack of privacy"})
        response = run(
            client, session_id, "record_finding",
            {"cell": "LESS/Soc1/autonomy", "hazard": "lack of privacy"},
        )
        assert response.status_code == 409
        error = response.json()["error"]
        assert error["code"] == "CONFLICT_DUPLICATE_FINDING"
        assert error["details"]["existing_id"] == "F01"
        assert error["details"]["hazard"] == "lack of privacy"
        assert "F01" in error["message"]

    def test_unresolved_register_resubmit(self, client, session_id):
        response = run(
            client, session_id, "record_finding",
            {"cell": "MORE/Soc1", "hazard": "Erosion of confidence"},
        )
        assert response.status_code == 422
        assert response.json()["error"]["code"] == "UNRESOLVED_HAZARD"
        assert response.json()["error"]["details"]["name"] == "Erosion of confidence"

        response = run(
            client, session_id, "register_hazard",
            {"name": "Erosion of confidence", "description": "self-doubt induced by prompts"},
        )
        assert response.status_code == 200
        assert response.json()["result"]["canonical_name"] == "erosion of confidence"

        response = run(
            client, session_id, "record_finding",
            {"cell": "MORE/Soc1", "hazard": "Erosion of confidence"},
        )
        assert response.status_code == 200
        assert response.json()["result"]["is_novel"] is True

    def test_link_and_note_and_mark(self, client, session_id):
        run(client, session_id, "record_finding", {"cell": "MORE/Soc1", "hazard": "deception"})
        run(client, session_id, "record_finding", {"cell": "MORE/Coa1", "hazard": "dehumanisation"})
        response = run(
            client, session_id, "link_findings",
            {"from": "F01", "to": "F02", "relation": "LEADS_TO", "note": "knock-on"},
        )
        assert response.json()["result"]["relation"] == "LEADS_TO"
        response = run(client, session_id, "add_note", {"text": "room discussion", "finding": "F01"})
        assert response.status_code == 200
        response = run(client, session_id, "mark_cell", {"cell": "MORE/Soc1", "status": "EXPLORED"})
        assert response.json()["result"]["status"] == "EXPLORED"

    def test_close_freezes(self, client, session_id):
        assert run(client, session_id, "close_session").status_code == 200
        response = run(client, session_id, "open_cell", {"cell": "MORE/Soc1"})
        assert response.status_code == 422
        info = client.get(f"/v1/sessions/{session_id}").json()
        assert info["closed"] is True

    def test_unknown_command(self, client, session_id):
        assert run(client, session_id, "dance").status_code == 400

    def test_missing_param(self, client, session_id):
        assert run(client, session_id, "open_cell", {}).status_code == 400

    def test_unknown_cell_404(self, client, session_id):
        assert run(client, session_id, "open_cell", {"cell": "MORE/Ghost"}).status_code == 404

    def test_bad_params_type(self, client, session_id):
        response = client.post(
            f"/v1/sessions/{session_id}/commands",
            json={"command": "open_cell", "params": "MORE/Soc1"},
        )
        assert response.status_code == 400


class TestIdempotency:
    def test_success_replayed_not_reexecuted(self, client, session_id):
        params = {"cell": "MORE/Soc1", "hazard": "Lack of privacy"}
        first = run(client, session_id, "record_finding", params, token="tok-1")
        again = run(client, session_id, "record_finding", params, token="tok-1")
        assert first.status_code == again.status_code == 200
        assert first.json() == again.json()
        info = client.get(f"/v1/sessions/{session_id}").json()
        assert info["findings"] == 1
        assert info["last_seq"] == 2

    def test_failure_outcome_cached(self, client, session_id):
        run(client, session_id, "record_finding", {"cell": "MORE/Soc1", "hazard": "deception"})
        params = {"cell": "LESS/Soc1", "hazard": "deception"}
        first = run(client, session_id, "record_finding", params, token="dup-1")
        again = run(client, session_id, "record_finding", params, token="dup-1")
        assert first.status_code == again.status_code == 409
        assert first.json() == again.json()

    def test_fresh_token_executes(self, client, session_id):
        params = {"cell": "MORE/Soc1", "hazard": "Lack of privacy", "notes": "n"}
        run(client, session_id, "record_finding", params, token="a")
        response = run(
            client, session_id, "record_finding",
            {"cell": "MORE/Coa1", "hazard": "Lack of privacy"}, token="b",
        )
        assert response.json()["result"]["id"] == "F02"

    def test_token_type_checked(self, client, session_id):
        response = client.post(
            f"/v1/sessions/{session_id}/commands",
            json={"command": "open_cell", "params": {"cell": "MORE/Soc1"}, "idempotency_token": 7},
        )
        assert response.status_code == 400


class TestReads:
    def test_cells_filters(self, client, session_id):
        cells = client.get(f"/v1/sessions/{session_id}/cells").json()["cells"]
        assert len(cells) == 77
        more = client.get(f"/v1/sessions/{session_id}/cells", params={"guideword": "MORE"}).json()["cells"]
        assert len(more) == 11
        soc1 = client.get(f"/v1/sessions/{session_id}/cells", params={"subject": "Soc1"}).json()["cells"]
        assert len(soc1) == 21  # bare, plus its characteristic-qualified cells
        generic = client.get(f"/v1/sessions/{session_id}/cells", params={"subject": "*/autonomy"}).json()["cells"]
        assert len(generic) == 7
        unexplored = client.get(f"/v1/sessions/{session_id}/cells", params={"status": "OPEN"}).json()["cells"]
        assert unexplored == []

    def test_cells_carry_prompts(self, client, session_id, ari_study):
        first = client.get(f"/v1/sessions/{session_id}/cells").json()["cells"][0]
        assert first["id"] == "MORE/Cog1"
        expected = generate_prompt(parse_cell_id("MORE/Cog1"), ari_study.system, default_catalog())
        assert first["prompt"] == expected

    def test_coverage_shape(self, client, session_id):
        coverage = client.get(f"/v1/sessions/{session_id}/coverage").json()
        assert coverage["cell_count"] == 77
        assert sum(coverage["totals"].values()) == 77
        assert len(coverage["statuses"]) == 77

    def test_findings_listing(self, client, session_id):
        run(client, session_id, "record_finding", {"cell": "MORE/Soc1", "hazard": "deception"})
        findings = client.get(f"/v1/sessions/{session_id}/findings").json()["findings"]
        assert [f["id"] for f in findings] == ["F01"]
        assert findings[0]["group"] == "Soc1"


class TestPreloadedJournal:
    def test_session_info(self, preloaded):
        client, session_id, _ = preloaded
        info = client.get(f"/v1/sessions/{session_id}").json()
        assert info["findings"] == 21
        assert info["novel"] == 2
        assert info["last_seq"] == 48
        assert info["journal"] is not None

    def test_report_endpoint_matches_golden(self, preloaded):
        client, session_id, _ = preloaded
        response = client.get(
            f"/v1/sessions/{session_id}/report", params={"subject": "Soc1", "format": "csv"}
        )
        assert response.text == (GOLDEN_DIR / "soc1.csv").read_text(encoding="utf-8")

    def test_report_unknown_subject_404(self, preloaded):
        client, session_id, _ = preloaded
        response = client.get(f"/v1/sessions/{session_id}/report", params={"subject": "Qux"})
        assert response.status_code == 404

    def test_report_bad_format_422(self, preloaded):
        client, session_id, _ = preloaded
        response = client.get(f"/v1/sessions/{session_id}/report", params={"format": "pdf"})
        assert response.status_code == 422

    def test_summary_endpoint(self, preloaded):
        client, session_id, _ = preloaded
        numbers = client.get(f"/v1/sessions/{session_id}/summary").json()
        assert numbers["total_findings"] == 21
        assert numbers["novel_findings"] == 2
        assert numbers["link_count"] == 4

    def test_trace_formats(self, preloaded):
        client, session_id, _ = preloaded
        graph = client.get(f"/v1/sessions/{session_id}/trace").json()
        assert len(graph["nodes"]) == 21 and len(graph["edges"]) == 4
        dot = client.get(f"/v1/sessions/{session_id}/trace", params={"format": "dot"})
        assert dot.text.startswith("digraph trace {")
        text = client.get(f"/v1/sessions/{session_id}/trace", params={"format": "text"})
        assert text.text.startswith("node F01")
        assert client.get(
            f"/v1/sessions/{session_id}/trace", params={"format": "png"}
        ).status_code == 400

    def test_duplicate_conflict_then_distinct_resubmit(self, preloaded):
        client, session_id, journal = preloaded
        params = {"cell": "LESS/Soc1/autonomy", "hazard": "Lack of privacy"}
        conflict = run(client, session_id, "record_finding", params)
        assert conflict.status_code == 409
        assert conflict.json()["error"]["details"]["existing_id"] == "F01"

        accepted = run(
            client, session_id, "record_finding",
            {**params, "distinct_presentation": True, "notes": "presents through autonomy"},
        )
        assert accepted.status_code == 200
        assert accepted.json()["result"]["id"] == "F22"
        # the accepted command, and only it, was persisted
        data = read_journal(journal)
        assert len(data.events) == 49
        assert data.events[-1].payload["distinct_presentation"] is True

    def test_commands_persist_to_journal(self, preloaded):
        client, session_id, journal = preloaded
        run(client, session_id, "open_cell", {"cell": "NEVER/Cog1"})
        data = read_journal(journal)
        assert data.events[-1].kind.value == "CELL_OPENED"
        assert data.events[-1].seq == 49


def _stream_lines(client, url):
    with client.stream("GET", url) as response:
        assert response.status_code == 200
        assert response.headers["content-type"].startswith("text/event-stream")
        return list(response.iter_lines())


class TestEventStream:
    def test_stream_reconstructs_journal_bytes(self, preloaded):
        client, session_id, journal = preloaded
        lines = _stream_lines(client, f"/v1/sessions/{session_id}/events")
        assert lines[0] == "event: header"
        assert lines[1] == "id: 0"
        data_fields = [line[len("data: "):] for line in lines if line.startswith("data: ")]
        reconstructed = "".join(field + "\n" for field in data_fields)
        assert reconstructed == journal.read_text(encoding="utf-8")

    def test_stream_includes_live_appends(self, preloaded):
        client, session_id, journal = preloaded
        run(client, session_id, "record_finding", {"cell": "NEVER/Cog1", "hazard": "robot addiction"})
        lines = _stream_lines(client, f"/v1/sessions/{session_id}/events")
        data_fields = [line[len("data: "):] for line in lines if line.startswith("data: ")]
        assert "".join(f + "\n" for f in data_fields) == journal.read_text(encoding="utf-8")
        assert "id: 49" in lines

    def test_resume_from_seq_skips_header(self, preloaded):
        client, session_id, _ = preloaded
        lines = _stream_lines(client, f"/v1/sessions/{session_id}/events?from_seq=10")
        assert lines[0] == "id: 10"
        assert all(not line.startswith("event: header") for line in lines)
        ids = [int(line[4:]) for line in lines if line.startswith("id: ")]
        assert ids == list(range(10, 49))

    def test_from_seq_validation(self, preloaded):
        client, session_id, _ = preloaded
        assert client.get(f"/v1/sessions/{session_id}/events?from_seq=0").status_code == 400
