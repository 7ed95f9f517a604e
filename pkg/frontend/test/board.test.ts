import { describe, expect, it } from "vitest";

import { Board, displayForm, normalizeHazard, starredLabel } from "../src/board.js";
import type { CellInfo, CellStatus, JournalEvent } from "../src/types.js";
import { GUIDEWORDS } from "../src/types.js";

// Cells as the /cells read model would list them for a two-function,
// one-characteristic model: guideword-major, subjects in model order.
function testCells(): CellInfo[] {
  const subjects: Array<[string, string, string | null]> = [
    ["Fn1", "Fn1", null],
    ["Fn2", "Fn2", null],
    ["Fn1/char1", "Fn1", "char1"],
    ["Fn2/char1", "Fn2", "char1"],
    ["*/char1", "*/char1", "char1"],
  ];
  const cells: CellInfo[] = [];
  for (const guideword of GUIDEWORDS) {
    for (const [key, group, characteristic] of subjects) {
      cells.push({
        id: `${guideword}/${key}`,
        guideword,
        subject: key,
        group,
        characteristic,
        status: "UNEXPLORED",
        prompt: `What if ${guideword} ${key}?`,
      });
    }
  }
  return cells;
}

let seqCounter = 0;

function event(kind: JournalEvent["kind"], payload: Record<string, unknown>, seq?: number): JournalEvent {
  seqCounter = seq ?? seqCounter + 1;
  return { seq: seqCounter, kind, payload, at: "2024-05-14T09:00:00Z" };
}

function startedEvent(): JournalEvent {
  seqCounter = 0;
  return event("SESSION_STARTED", {
    study_digest: "abc",
    config: {},
    taxonomy: [
      {
        canonical_name: "lack of privacy",
        aliases: [],
        description: "",
        source: "BASE_CATALOG",
      },
      {
        canonical_name: "inappropriate trust",
        aliases: ["inappropriate trust (deception)"],
        description: "",
        source: "BASE_CATALOG",
      },
    ],
  });
}

describe("fresh board", () => {
  it("renders every cell unexplored at cursor 0", () => {
    const board = new Board(testCells());
    expect(board.cursor).toBe(0);
    expect(board.cells.size).toBe(35);
    expect(new Set(Object.values(board.statuses()))).toEqual(new Set(["UNEXPLORED"]));
    expect(board.findings).toHaveLength(0);
  });

  it("lays out rows in model order with characteristic subjects nested", () => {
    const grid = new Board(testCells()).grid();
    expect(grid.columns).toEqual(GUIDEWORDS);
    expect(grid.rows.map((row) => row.subject)).toEqual(["Fn1", "Fn2", "*/char1"]);
    expect(grid.rows[0]?.nested.map((row) => row.subject)).toEqual(["Fn1/char1"]);
    expect(grid.rows[1]?.nested.map((row) => row.subject)).toEqual(["Fn2/char1"]);
    expect(grid.rows[2]?.nested).toEqual([]);
  });
});

describe("event folding", () => {
  it("opens cells, records findings, and marks statuses like the engine", () => {
    const board = new Board(testCells());
    board.apply(startedEvent());
    board.apply(event("CELL_OPENED", { cell: "MORE/Fn1" }));
    expect(board.cell("MORE/Fn1")?.status).toBe("OPEN");

    board.apply(
      event("FINDING_RECORDED", {
        cell: "MORE/Fn2",
        name: "Lack of privacy",
        scenario: "s",
        notes: "",
        classification: "SIMPLE",
        distinct_presentation: false,
      }),
    );
    const finding = board.findings[0];
    expect(finding?.id).toBe("F01");
    expect(finding?.hazard).toBe("lack of privacy");
    expect(finding?.label).toBe("Lack of privacy");
    expect(finding?.novel).toBe(false);
    expect(board.cell("MORE/Fn2")?.status).toBe("OPEN");
    expect(board.cell("MORE/Fn2")?.findingIds).toEqual(["F01"]);

    board.apply(event("CELL_MARKED", { cell: "MORE/Fn2", status: "EXPLORED" }));
    expect(board.cell("MORE/Fn2")?.status).toBe("EXPLORED");
    board.apply(event("CELL_OPENED", { cell: "MORE/Fn2" }));
    expect(board.cell("MORE/Fn2")?.status).toBe("EXPLORED");
  });

  it("resolves aliases to their canonical hazard", () => {
    const board = new Board(testCells());
    board.apply(startedEvent());
    board.apply(
      event("FINDING_RECORDED", {
        cell: "MORE/Fn1",
        name: "Inappropriate trust (deception)",
      }),
    );
    expect(board.findings[0]?.hazard).toBe("inappropriate trust");
    expect(board.findings[0]?.label).toBe("Inappropriate trust (deception)");
  });

  it("stars hazards registered during the session", () => {
    const board = new Board(testCells());
    board.apply(startedEvent());
    board.apply(event("HAZARD_REGISTERED", { name: "Erosion of confidence", description: "" }));
    board.apply(
      event("FINDING_RECORDED", { cell: "LESS/Fn1", name: "erosion of confidence" }),
    );
    const finding = board.findings[0];
    expect(finding?.novel).toBe(true);
    expect(starredLabel(finding!)).toBe("erosion of confidence*");
  });

  it("tracks links, notes, and session close", () => {
    const board = new Board(testCells());
    board.apply(startedEvent());
    board.apply(event("FINDING_RECORDED", { cell: "MORE/Fn1", name: "lack of privacy" }));
    board.apply(
      event("FINDING_RECORDED", {
        cell: "MORE/Fn2",
        name: "lack of privacy",
        distinct_presentation: true,
      }),
    );
    board.apply(
      event("FINDING_LINKED", { from: "F02", to: "F01", relation: "PRESENTS_AS", note: "n" }),
    );
    board.apply(event("NOTE_ADDED", { text: "t", cell: "MORE/Fn1" }));
    board.apply(event("SESSION_CLOSED", {}));
    expect(board.links).toEqual([
      { from: "F02", to: "F01", relation: "PRESENTS_AS", note: "n", seq: 4 },
    ]);
    expect(board.noteCount).toBe(1);
    expect(board.closed).toBe(true);
    expect(board.findings[1]?.distinct).toBe(true);
  });
});

describe("cursor monotonicity", () => {
  it("ignores replayed events and never regresses", () => {
    const board = new Board(testCells());
    const started = startedEvent();
    const opened = event("CELL_OPENED", { cell: "MORE/Fn1" });
    expect(board.apply(started)).toBe(true);
    expect(board.apply(opened)).toBe(true);
    expect(board.apply(opened)).toBe(false);
    expect(board.apply(started)).toBe(false);
    expect(board.cursor).toBe(2);
  });

  it("throws on a sequence gap", () => {
    const board = new Board(testCells());
    board.apply(startedEvent());
    expect(() =>
      board.apply({ seq: 5, kind: "CELL_OPENED", payload: { cell: "MORE/Fn1" }, at: "" }),
    ).toThrow(/gap/);
  });
});

describe("snapshot join", () => {
  it("seeds statuses, findings, and cursor, then applies later events", () => {
    const cells = testCells();
    const withStatus = cells.map((cell) =>
      cell.id === "MORE/Fn1" ? { ...cell, status: "EXPLORED" as CellStatus } : cell,
    );
    const board = Board.atSnapshot(
      withStatus,
      [
        {
          id: "F01",
          cell: "MORE/Fn1",
          guideword: "MORE",
          subject: "Fn1",
          group: "Fn1",
          hazard: "erosion of confidence",
          label: "Erosion of confidence",
          scenario: "",
          notes: "",
          classification: "UNCLASSIFIED",
          distinct_presentation: false,
          is_novel: true,
          seq: 3,
        },
      ],
      4,
    );
    expect(board.cursor).toBe(4);
    expect(board.cell("MORE/Fn1")?.status).toBe("EXPLORED");
    expect(board.cell("MORE/Fn1")?.findingIds).toEqual(["F01"]);
    expect(starredLabel(board.findings[0]!)).toBe("Erosion of confidence*");

    // a later finding on the pre-join novel hazard still renders starred
    board.apply(
      event("FINDING_RECORDED", { cell: "LESS/Fn2", name: "Erosion of confidence" }, 5),
    );
    expect(board.findings[1]?.novel).toBe(true);
    expect(board.findings[1]?.id).toBe("F02");
  });
});

describe("coverage comparison", () => {
  it("matches a coverage payload exactly and detects drift", () => {
    const board = new Board(testCells());
    board.apply(startedEvent());
    board.apply(event("CELL_OPENED", { cell: "NEVER/Fn1" }));
    const statuses = board.statuses();
    const coverage = {
      statuses,
      by_guideword: {},
      by_subject: {},
      totals: {},
      cell_count: 35,
      explored_fraction: 0,
    };
    expect(board.matchesCoverage(coverage)).toBe(true);
    expect(
      board.matchesCoverage({
        ...coverage,
        statuses: { ...statuses, "NEVER/Fn1": "UNEXPLORED" as CellStatus },
      }),
    ).toBe(false);
  });
});

describe("hazard name forms", () => {
  it("collapses whitespace and strips trailing stars", () => {
    expect(displayForm("  Erosion   of confidence * *")).toBe("Erosion of confidence");
    expect(displayForm("Deception*")).toBe("Deception");
    expect(normalizeHazard("  LACK of   Privacy ")).toBe("lack of privacy");
    expect(normalizeHazard("Erosion of confidence*")).toBe("erosion of confidence");
  });
});
