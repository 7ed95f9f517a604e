// Browser wiring: renders the board, the cell panel, the conflict dialog, and
// the trace view, and keeps them live from the event stream. All state changes
// go through service commands; the DOM below owns nothing but presentation.

import { ApiClient } from "./api.js";
import { Board, starredLabel } from "./board.js";
import type { BoardCell, BoardRow } from "./board.js";
import { SubmitController } from "./conflict.js";
import { decodeEvent, streamEvents } from "./sse.js";
import { GUIDEWORD_LABELS, GUIDEWORDS } from "./types.js";
import type { FindingDraft, SessionInfo } from "./types.js";

interface AppState {
  api: ApiClient;
  sessionId: string;
  board: Board;
  info: SessionInfo;
  selectedCell: string | null;
  pendingCells: Set<string>;
  submit: SubmitController | null;
  streamAbort: AbortController | null;
}

let state: AppState | null = null;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (node === null) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

function text(tag: string, content: string, className?: string): HTMLElement {
  const node = document.createElement(tag);
  node.textContent = content;
  if (className !== undefined) {
    node.className = className;
  }
  return node;
}

async function connect(): Promise<void> {
  const base = (el<HTMLInputElement>("base-url").value || "").replace(/\/+$/, "");
  const api = new ApiClient(base);
  const sessions = await api.listSessions();
  const picker = el<HTMLSelectElement>("session-picker");
  picker.innerHTML = "";
  for (const session of sessions) {
    const option = document.createElement("option");
    option.value = session.session_id;
    option.textContent = `${session.session_id} (${session.findings} findings)`;
    picker.appendChild(option);
  }
  if (sessions.length === 0) {
    el("status-bar").textContent = "no sessions on this service";
    return;
  }
  await loadSession(api, sessions[sessions.length - 1]!.session_id);
}

async function loadSession(api: ApiClient, sessionId: string): Promise<void> {
  state?.streamAbort?.abort();
  const [info, cells, findings] = await Promise.all([
    api.session(sessionId),
    api.cells(sessionId),
    api.findings(sessionId),
  ]);
  const board = Board.atSnapshot(cells, findings, info.last_seq);
  state = {
    api,
    sessionId,
    board,
    info,
    selectedCell: null,
    pendingCells: new Set(),
    submit: null,
    streamAbort: new AbortController(),
  };
  el<HTMLSelectElement>("session-picker").value = sessionId;
  renderAll();
  void follow();
}

async function follow(): Promise<void> {
  const current = state;
  if (current === null || current.streamAbort === null) {
    return;
  }
  try {
    const stream = streamEvents(current.api.baseUrl, current.sessionId, {
      fromSeq: current.board.cursor + 1,
      follow: true,
      signal: current.streamAbort.signal,
    });
    for await (const message of stream) {
      if (message.event === "header" || state !== current) {
        continue;
      }
      const event = decodeEvent(message);
      if (current.board.apply(event)) {
        if (event.kind !== "SESSION_STARTED") {
          const cell = event.payload["cell"];
          if (typeof cell === "string") {
            current.pendingCells.delete(cell);
          }
        }
        renderAll();
      }
    }
  } catch (error) {
    if (state === current && !current.streamAbort.signal.aborted) {
      el("status-bar").textContent = `stream lost (${String(error)}); reconnecting`;
      setTimeout(() => void follow(), 1000);
    }
  }
}

function renderAll(): void {
  if (state === null) {
    return;
  }
  renderStatusBar();
  renderGrid();
  renderCellPanel();
  renderFindings();
  renderTrace();
}

function renderStatusBar(): void {
  if (state === null) {
    return;
  }
  const board = state.board;
  const explored = [...board.cells.values()].filter(
    (cell) => cell.status === "EXPLORED",
  ).length;
  el("status-bar").textContent =
    `session ${state.sessionId} · seq ${board.cursor} · ` +
    `${board.findings.length} findings · ${explored}/${board.cells.size} explored` +
    (board.closed ? " · CLOSED" : "");
}

function rowLabel(row: BoardRow): string {
  if (row.subject.startsWith("*/")) {
    return `all functions / ${row.subject.slice(2)}`;
  }
  return row.subject;
}

function renderGrid(): void {
  if (state === null) {
    return;
  }
  const board = state.board;
  const grid = board.grid();
  const table = document.createElement("table");
  table.className = "board";
  const head = document.createElement("tr");
  head.appendChild(text("th", "subject"));
  for (const guideword of GUIDEWORDS) {
    head.appendChild(text("th", GUIDEWORD_LABELS[guideword]));
  }
  table.appendChild(head);
  const addRow = (row: BoardRow, depth: number): void => {
    const tr = document.createElement("tr");
    const label = text("th", rowLabel(row), depth > 0 ? "nested" : undefined);
    tr.appendChild(label);
    for (const guideword of grid.columns) {
      const cell = board.cellFor(guideword, row.subject);
      tr.appendChild(gridCell(cell));
    }
    table.appendChild(tr);
    for (const nested of row.nested) {
      addRow(nested, depth + 1);
    }
  };
  for (const row of grid.rows) {
    addRow(row, 0);
  }
  const host = el("grid-host");
  host.innerHTML = "";
  host.appendChild(table);
}

function gridCell(cell: BoardCell | undefined): HTMLElement {
  const td = document.createElement("td");
  if (cell === undefined) {
    td.className = "absent";
    return td;
  }
  td.className = `status-${cell.status.toLowerCase()}`;
  if (state?.pendingCells.has(cell.id)) {
    td.classList.add("pending");
  }
  if (state?.selectedCell === cell.id) {
    td.classList.add("selected");
  }
  td.textContent = cell.findingIds.length > 0 ? String(cell.findingIds.length) : "";
  td.title = cell.id;
  td.addEventListener("click", () => void selectCell(cell.id));
  return td;
}

async function selectCell(cellId: string): Promise<void> {
  if (state === null) {
    return;
  }
  state.selectedCell = cellId;
  const cell = state.board.cell(cellId);
  if (cell !== undefined && cell.status === "UNEXPLORED" && !state.info.closed) {
    state.pendingCells.add(cellId);
    renderAll();
    await state.api.command(state.sessionId, "open_cell", { cell: cellId });
  } else {
    renderAll();
  }
}

function renderCellPanel(): void {
  if (state === null) {
    return;
  }
  const host = el("cell-panel");
  host.innerHTML = "";
  const cellId = state.selectedCell;
  const cell = cellId === null ? undefined : state.board.cell(cellId);
  if (cell === undefined) {
    host.appendChild(text("p", "Select a cell to see its what-if prompt.", "hint"));
    return;
  }
  host.appendChild(text("h2", cell.id));
  host.appendChild(text("p", cell.prompt, "prompt"));
  host.appendChild(text("p", `status: ${cell.status}`, "cell-status"));

  const marks = document.createElement("div");
  marks.className = "mark-buttons";
  for (const status of ["EXPLORED", "DEFERRED", "NOT_APPLICABLE"] as const) {
    const button = text("button", `mark ${status.toLowerCase()}`, "mark");
    button.addEventListener("click", () => {
      void markCell(cell.id, status);
    });
    marks.appendChild(button);
  }
  host.appendChild(marks);
  host.appendChild(findingForm(cell));
}

async function markCell(cellId: string, status: string): Promise<void> {
  if (state === null) {
    return;
  }
  state.pendingCells.add(cellId);
  renderAll();
  const outcome = await state.api.command(state.sessionId, "mark_cell", {
    cell: cellId,
    status,
  });
  if (!outcome.ok) {
    state.pendingCells.delete(cellId);
    el("status-bar").textContent = outcome.message;
    renderAll();
  }
}

function findingForm(cell: BoardCell): HTMLElement {
  const form = document.createElement("form");
  form.className = "finding-form";
  form.innerHTML = `
    <label>hazard <input name="hazard" required></label>
    <label>scenario <textarea name="scenario" rows="2"></textarea></label>
    <label>notes <input name="notes"></label>
    <label>classification
      <select name="classification">
        <option>UNCLASSIFIED</option><option>SIMPLE</option><option>COMPLEX</option>
      </select>
    </label>
    <button type="submit">record finding</button>
  `;
  form.addEventListener("submit", (submitEvent) => {
    submitEvent.preventDefault();
    const data = new FormData(form);
    void submitFinding({
      cell: cell.id,
      hazard: String(data.get("hazard") ?? ""),
      scenario: String(data.get("scenario") ?? ""),
      notes: String(data.get("notes") ?? ""),
      classification: String(data.get("classification")) as FindingDraft["classification"],
    });
  });
  return form;
}

async function submitFinding(draft: FindingDraft): Promise<void> {
  if (state === null) {
    return;
  }
  state.submit = new SubmitController(state.api, state.sessionId);
  state.pendingCells.add(draft.cell);
  renderAll();
  const phase = await state.submit.submit(draft);
  handleSubmitPhase(draft.cell, phase);
}

function handleSubmitPhase(
  cellId: string,
  phase: Awaited<ReturnType<SubmitController["submit"]>>,
): void {
  if (state === null) {
    return;
  }
  const dialog = el<HTMLDialogElement>("conflict-dialog");
  if (phase.kind === "accepted") {
    el("status-bar").textContent = `recorded ${phase.finding.id}`;
    dialog.close();
    return;
  }
  state.pendingCells.delete(cellId);
  if (phase.kind === "conflict") {
    el("conflict-message").textContent = phase.message;
    dialog.returnValue = "";
    dialog.showModal();
    el("conflict-distinct").onclick = () => {
      dialog.close();
      void state?.submit?.resubmitDistinct().then((next) => {
        state?.pendingCells.add(cellId);
        handleSubmitPhase(cellId, next);
      });
    };
    el("conflict-merge").onclick = () => {
      const note = el<HTMLInputElement>("conflict-note").value;
      dialog.close();
      void state?.submit?.mergeNote(note).then((next) => {
        handleSubmitPhase(cellId, next);
      });
    };
    return;
  }
  if (phase.kind === "unresolved") {
    const description = window.prompt(
      `"${phase.name}" is not in the hazard taxonomy. ` +
        "Describe it to register it as a novel hazard (it will render starred):",
    );
    if (description !== null) {
      state.pendingCells.add(cellId);
      void state.submit?.registerAndResubmit(description).then((next) => {
        handleSubmitPhase(cellId, next);
      });
    }
    return;
  }
  if (phase.kind === "merged") {
    el("status-bar").textContent = `note merged into ${phase.existingId}`;
    return;
  }
  if (phase.kind === "rejected") {
    el("status-bar").textContent = `${phase.code}: ${phase.message}`;
    renderAll();
  }
}

function renderFindings(): void {
  if (state === null) {
    return;
  }
  const host = el("findings-host");
  host.innerHTML = "";
  const groups = new Map<string, number>();
  for (const finding of state.board.findings) {
    groups.set(finding.group, (groups.get(finding.group) ?? 0) + 1);
  }
  for (const [group, count] of groups) {
    const section = document.createElement("details");
    section.open = true;
    const summaryRow = document.createElement("summary");
    summaryRow.textContent = `${group} (${count})`;
    section.appendChild(summaryRow);
    const list = document.createElement("ul");
    for (const finding of state.board.findingsForGroup(group)) {
      const item = text(
        "li",
        `${finding.id} ${starredLabel(finding)}` +
          (finding.distinct ? " (distinct presentation)" : ""),
        finding.novel ? "novel" : undefined,
      );
      item.title = finding.scenario;
      list.appendChild(item);
    }
    section.appendChild(list);
    host.appendChild(section);
  }
}

function renderTrace(): void {
  if (state === null) {
    return;
  }
  const host = el("trace-host");
  host.innerHTML = "";
  const list = document.createElement("ul");
  for (const link of state.board.links) {
    list.appendChild(
      text(
        "li",
        `${link.from} -${link.relation}-> ${link.to}` +
          (link.note !== "" ? ` (${link.note})` : ""),
      ),
    );
  }
  host.appendChild(list);
  host.appendChild(linkForm());
}

function linkForm(): HTMLElement {
  const form = document.createElement("form");
  form.className = "link-form";
  const options = (state?.board.findings ?? [])
    .map((finding) => `<option>${finding.id}</option>`)
    .join("");
  form.innerHTML = `
    <select name="from">${options}</select>
    <select name="relation">
      <option>RELATED</option><option>REINFORCES</option>
      <option>LEADS_TO</option><option>PRESENTS_AS</option>
    </select>
    <select name="to">${options}</select>
    <button type="submit">link</button>
  `;
  form.addEventListener("submit", (submitEvent) => {
    submitEvent.preventDefault();
    if (state === null) {
      return;
    }
    const data = new FormData(form);
    void state.api
      .command(state.sessionId, "link_findings", {
        from: String(data.get("from")),
        to: String(data.get("to")),
        relation: String(data.get("relation")),
      })
      .then((outcome) => {
        if (!outcome.ok) {
          el("status-bar").textContent = outcome.message;
        }
      });
  });
  return form;
}

function main(): void {
  el("connect").addEventListener("click", () => void connect());
  el<HTMLSelectElement>("session-picker").addEventListener("change", (change) => {
    const target = change.target as HTMLSelectElement;
    if (state !== null) {
      void loadSession(state.api, target.value);
    }
  });
  void connect();
}

if (typeof document !== "undefined") {
  document.addEventListener("DOMContentLoaded", main);
}
