// The board view model: a pure fold of journal events into the examination
// grid. It mirrors the engine's status transitions exactly, which is what
// makes "grid equals the coverage endpoint" testable. It renders; it does not
// validate. Rejected commands never reach the stream, so every event here is
// one the engine already accepted.

import type {
  CellInfo,
  CellStatus,
  CoverageDto,
  FindingDto,
  GuideWord,
  JournalEvent,
  LinkDto,
  TaxonomyEntryDto,
} from "./types.js";
import { GUIDEWORDS } from "./types.js";

function collapse(name: string): string {
  return name.replace(/\s+/g, " ").trim();
}

// Surface form: whitespace collapsed, trailing novelty stars stripped.
export function displayForm(name: string): string {
  let text = collapse(name);
  while (text.endsWith("*")) {
    text = text.slice(0, -1).trimEnd();
  }
  return text;
}

// Matching form: surface form, case-insensitive.
export function normalizeHazard(name: string): string {
  return displayForm(name).toLowerCase();
}

export interface BoardFinding {
  id: string;
  cell: string;
  group: string;
  hazard: string;
  label: string;
  novel: boolean;
  distinct: boolean;
  classification: string;
  scenario: string;
  notes: string;
  seq: number;
}

// Label rendering used everywhere a hazard name appears: novel entries are starred.
export function starredLabel(finding: Pick<BoardFinding, "label" | "novel">): string {
  return finding.novel ? `${finding.label}*` : finding.label;
}

export interface BoardCell {
  id: string;
  guideword: GuideWord;
  subject: string;
  group: string;
  characteristic: string | null;
  prompt: string;
  status: CellStatus;
  findingIds: string[];
}

export interface BoardRow {
  subject: string;
  nested: BoardRow[];
}

export interface BoardGrid {
  columns: readonly GuideWord[];
  rows: BoardRow[];
}

interface HazardInfo {
  canonical: string;
  novel: boolean;
}

export class Board {
  readonly cells = new Map<string, BoardCell>();
  cursor = 0;
  closed = false;
  findings: BoardFinding[] = [];
  links: LinkDto[] = [];
  noteCount = 0;
  private hazards = new Map<string, HazardInfo>();
  private subjectOrder: string[] = [];

  // A fresh board: every cell unexplored, cursor before the first event.
  constructor(cells: CellInfo[]) {
    for (const cell of cells) {
      this.cells.set(cell.id, {
        id: cell.id,
        guideword: cell.guideword,
        subject: cell.subject,
        group: cell.group,
        characteristic: cell.characteristic,
        prompt: cell.prompt,
        status: "UNEXPLORED",
        findingIds: [],
      });
      if (!this.subjectOrder.includes(cell.subject)) {
        this.subjectOrder.push(cell.subject);
      }
    }
  }

  // A board joining mid-session: statuses from the cells read model, findings
  // from the findings read model, cursor at the session's last seq. Later
  // events are applied from fromSeq = lastSeq + 1.
  static atSnapshot(cells: CellInfo[], findings: FindingDto[], lastSeq: number): Board {
    const board = new Board(cells);
    for (const cell of cells) {
      const entry = board.cells.get(cell.id);
      if (entry !== undefined) {
        entry.status = cell.status;
      }
    }
    for (const dto of findings) {
      board.recordFromDto(dto);
      // hazards registered before the join are only visible through their
      // findings; seed novelty so later findings on them stay starred
      board.hazards.set(normalizeHazard(dto.hazard), {
        canonical: dto.hazard,
        novel: dto.is_novel,
      });
    }
    board.cursor = lastSeq;
    return board;
  }

  private recordFromDto(dto: FindingDto): void {
    const finding: BoardFinding = {
      id: dto.id,
      cell: dto.cell,
      group: dto.group,
      hazard: dto.hazard,
      label: dto.label,
      novel: dto.is_novel,
      distinct: dto.distinct_presentation,
      classification: dto.classification,
      scenario: dto.scenario,
      notes: dto.notes,
      seq: dto.seq,
    };
    this.findings.push(finding);
    this.cells.get(dto.cell)?.findingIds.push(dto.id);
  }

  // Apply one stream event. Returns false when the event is at or behind the
  // cursor (the view never regresses); throws on a gap, which means the
  // subscription lost data and must be re-established.
  apply(event: JournalEvent): boolean {
    if (event.seq <= this.cursor) {
      return false;
    }
    if (event.seq !== this.cursor + 1) {
      throw new Error(
        `event gap: cursor at ${this.cursor}, received seq ${event.seq}`,
      );
    }
    switch (event.kind) {
      case "SESSION_STARTED":
        this.onStarted(event.payload);
        break;
      case "CELL_OPENED":
        this.transition(String(event.payload["cell"]), "OPEN");
        break;
      case "FINDING_RECORDED":
        this.onFinding(event.payload, event.seq);
        break;
      case "FINDING_LINKED":
        this.links.push({
          from: String(event.payload["from"]),
          to: String(event.payload["to"]),
          relation: String(event.payload["relation"]) as LinkDto["relation"],
          note: String(event.payload["note"] ?? ""),
          seq: event.seq,
        });
        break;
      case "CELL_MARKED": {
        const cell = this.cells.get(String(event.payload["cell"]));
        if (cell !== undefined) {
          cell.status = String(event.payload["status"]) as CellStatus;
        }
        break;
      }
      case "HAZARD_REGISTERED": {
        const name = String(event.payload["name"] ?? "");
        this.hazards.set(normalizeHazard(name), {
          canonical: normalizeHazard(name),
          novel: true,
        });
        break;
      }
      case "NOTE_ADDED":
        this.noteCount += 1;
        break;
      case "SESSION_CLOSED":
        this.closed = true;
        break;
    }
    this.cursor = event.seq;
    return true;
  }

  private onStarted(payload: Record<string, unknown>): void {
    const entries = (payload["taxonomy"] ?? []) as TaxonomyEntryDto[];
    for (const entry of entries) {
      const info: HazardInfo = {
        canonical: entry.canonical_name,
        novel: entry.source !== "BASE_CATALOG",
      };
      this.hazards.set(normalizeHazard(entry.canonical_name), info);
      for (const alias of entry.aliases) {
        this.hazards.set(normalizeHazard(alias), info);
      }
    }
  }

  private onFinding(payload: Record<string, unknown>, seq: number): void {
    const cellId = String(payload["cell"]);
    const cell = this.cells.get(cellId);
    const submitted = String(payload["name"] ?? "");
    const resolved = this.hazards.get(normalizeHazard(submitted));
    const finding: BoardFinding = {
      id: `F${String(this.findings.length + 1).padStart(2, "0")}`,
      cell: cellId,
      group: cell?.group ?? cellId,
      hazard: resolved?.canonical ?? normalizeHazard(submitted),
      label: displayForm(submitted),
      novel: resolved?.novel ?? false,
      distinct: Boolean(payload["distinct_presentation"]),
      classification: String(payload["classification"] ?? "UNCLASSIFIED"),
      scenario: String(payload["scenario"] ?? ""),
      notes: String(payload["notes"] ?? ""),
      seq,
    };
    this.findings.push(finding);
    if (cell !== undefined) {
      cell.findingIds.push(finding.id);
      if (cell.status === "UNEXPLORED") {
        cell.status = "OPEN";
      }
    }
  }

  private transition(cellId: string, status: CellStatus): void {
    const cell = this.cells.get(cellId);
    if (cell !== undefined && cell.status === "UNEXPLORED") {
      cell.status = status;
    }
  }

  // The comparison target for the coverage endpoint's statuses matrix.
  statuses(): Record<string, CellStatus> {
    const out: Record<string, CellStatus> = {};
    for (const [id, cell] of this.cells) {
      out[id] = cell.status;
    }
    return out;
  }

  matchesCoverage(coverage: CoverageDto): boolean {
    const mine = this.statuses();
    const theirs = coverage.statuses;
    const ids = Object.keys(mine);
    if (ids.length !== Object.keys(theirs).length) {
      return false;
    }
    return ids.every((id) => mine[id] === theirs[id]);
  }

  cell(cellId: string): BoardCell | undefined {
    return this.cells.get(cellId);
  }

  cellFor(guideword: GuideWord, subject: string): BoardCell | undefined {
    return this.cells.get(`${guideword}/${subject}`);
  }

  findingsForGroup(group: string): BoardFinding[] {
    return this.findings.filter((finding) => finding.group === group);
  }

  // Rows in model order; function+characteristic subjects nest under their
  // function's row; generic-characteristic subjects close the list.
  grid(): BoardGrid {
    const topLevel: BoardRow[] = [];
    const byFunction = new Map<string, BoardRow>();
    const generic: BoardRow[] = [];
    for (const subject of this.subjectOrder) {
      const row: BoardRow = { subject, nested: [] };
      if (subject.startsWith("*/")) {
        generic.push(row);
        continue;
      }
      const slash = subject.indexOf("/");
      if (slash === -1) {
        topLevel.push(row);
        byFunction.set(subject, row);
        continue;
      }
      const parent = byFunction.get(subject.slice(0, slash));
      if (parent !== undefined) {
        parent.nested.push(row);
      } else {
        topLevel.push(row);
      }
    }
    return { columns: GUIDEWORDS, rows: [...topLevel, ...generic] };
  }
}
