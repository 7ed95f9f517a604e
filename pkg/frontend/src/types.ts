// Payload shapes of the /v1 service. Field names mirror the wire format.

export type GuideWord =
  | "MORE"
  | "LESS"
  | "EARLY"
  | "LATE"
  | "OPPOSITE"
  | "IN_ADDITION"
  | "NEVER";

export const GUIDEWORDS: readonly GuideWord[] = [
  "MORE",
  "LESS",
  "EARLY",
  "LATE",
  "OPPOSITE",
  "IN_ADDITION",
  "NEVER",
];

export const GUIDEWORD_LABELS: Record<GuideWord, string> = {
  MORE: "More",
  LESS: "Less",
  EARLY: "Early",
  LATE: "Late",
  OPPOSITE: "Opposite",
  IN_ADDITION: "In addition",
  NEVER: "Never",
};

export type CellStatus =
  | "UNEXPLORED"
  | "OPEN"
  | "EXPLORED"
  | "DEFERRED"
  | "NOT_APPLICABLE";

export type EventKind =
  | "SESSION_STARTED"
  | "CELL_OPENED"
  | "FINDING_RECORDED"
  | "FINDING_LINKED"
  | "CELL_MARKED"
  | "HAZARD_REGISTERED"
  | "NOTE_ADDED"
  | "SESSION_CLOSED";

export interface JournalEvent {
  seq: number;
  kind: EventKind;
  payload: Record<string, unknown>;
  at: string;
}

export interface TaxonomyEntryDto {
  canonical_name: string;
  aliases: string[];
  description: string;
  source: "BASE_CATALOG" | "SESSION";
}

export interface CellInfo {
  id: string;
  guideword: GuideWord;
  subject: string;
  group: string;
  characteristic: string | null;
  status: CellStatus;
  prompt: string;
}

export interface FindingDto {
  id: string;
  cell: string;
  guideword: GuideWord;
  subject: string;
  group: string;
  hazard: string;
  label: string;
  scenario: string;
  notes: string;
  classification: "SIMPLE" | "COMPLEX" | "UNCLASSIFIED";
  distinct_presentation: boolean;
  is_novel: boolean;
  seq: number;
}

export interface LinkDto {
  from: string;
  to: string;
  relation: "REINFORCES" | "LEADS_TO" | "PRESENTS_AS" | "RELATED";
  note: string;
  seq: number;
}

export interface CoverageDto {
  statuses: Record<string, CellStatus>;
  by_guideword: Record<string, Record<string, number>>;
  by_subject: Record<string, Record<string, number>>;
  totals: Record<string, number>;
  cell_count: number;
  explored_fraction: number;
}

export interface SessionInfo {
  session_id: string;
  study_id: string;
  closed: boolean;
  cell_count: number;
  findings: number;
  novel: number;
  last_seq: number;
  journal: string | null;
}

export interface ApiErrorBody {
  error: {
    code: string;
    message: string;
    details: Record<string, unknown>;
  };
}

export interface CommandAccepted {
  ok: true;
  seq: number;
  result: unknown;
}

export type CommandOutcome =
  | { ok: true; status: number; seq: number; result: unknown }
  | {
      ok: false;
      status: number;
      code: string;
      message: string;
      details: Record<string, unknown>;
    };

export interface FindingDraft {
  cell: string;
  hazard: string;
  scenario?: string;
  notes?: string;
  classification?: "SIMPLE" | "COMPLEX" | "UNCLASSIFIED";
  distinct_presentation?: boolean;
}
