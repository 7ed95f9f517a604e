// Finding-submission flow with conflict resolution. One logical attempt gets
// one idempotency token; a transport retry reuses it, while every new decision
// (resubmit as distinct, register-then-retry) is a new attempt with a fresh
// token, because it asks the server to do something different.

import type { ApiClient } from "./api.js";
import type { CommandOutcome, FindingDraft, FindingDto } from "./types.js";

export type SubmitPhase =
  | { kind: "idle" }
  | { kind: "accepted"; finding: FindingDto; seq: number }
  | {
      kind: "conflict";
      existingId: string;
      hazard: string;
      scope: string;
      message: string;
    }
  | { kind: "unresolved"; name: string; message: string }
  | { kind: "merged"; existingId: string; seq: number }
  | { kind: "rejected"; code: string; message: string };

export type CommandPort = Pick<ApiClient, "command">;

function defaultTokens(): string {
  return crypto.randomUUID();
}

export class SubmitController {
  phase: SubmitPhase = { kind: "idle" };
  private draft: FindingDraft | null = null;
  private token: string | null = null;

  constructor(
    private readonly api: CommandPort,
    private readonly sessionId: string,
    private readonly nextToken: () => string = defaultTokens,
  ) {}

  get lastToken(): string | null {
    return this.token;
  }

  async submit(draft: FindingDraft): Promise<SubmitPhase> {
    this.draft = { ...draft };
    this.token = this.nextToken();
    return this.send();
  }

  // Re-send the in-flight attempt after a transport failure. Same token, so a
  // command that did land is replayed, not repeated.
  async retry(): Promise<SubmitPhase> {
    if (this.draft === null || this.token === null) {
      throw new Error("nothing to retry");
    }
    return this.send();
  }

  // From the conflict dialog: the group judged the presentation distinct.
  async resubmitDistinct(): Promise<SubmitPhase> {
    if (this.phase.kind !== "conflict" || this.draft === null) {
      throw new Error("no conflict to resolve");
    }
    this.draft = { ...this.draft, distinct_presentation: true };
    this.token = this.nextToken();
    return this.send();
  }

  // From the conflict dialog: fold the new observation into the earlier finding.
  async mergeNote(text: string): Promise<SubmitPhase> {
    if (this.phase.kind !== "conflict") {
      throw new Error("no conflict to resolve");
    }
    const existingId = this.phase.existingId;
    const outcome = await this.api.command(
      this.sessionId,
      "add_note",
      { text, finding: existingId },
      this.nextToken(),
    );
    if (outcome.ok) {
      this.phase = { kind: "merged", existingId, seq: outcome.seq };
    } else {
      this.phase = { kind: "rejected", code: outcome.code, message: outcome.message };
    }
    return this.phase;
  }

  // From the unresolved-hazard prompt: register the novel hazard, then replay
  // the same draft. The resulting finding renders starred.
  async registerAndResubmit(description = ""): Promise<SubmitPhase> {
    if (this.phase.kind !== "unresolved" || this.draft === null) {
      throw new Error("no unresolved hazard to register");
    }
    const registration = await this.api.command(
      this.sessionId,
      "register_hazard",
      { name: this.draft.hazard, description },
      this.nextToken(),
    );
    if (!registration.ok) {
      this.phase = {
        kind: "rejected",
        code: registration.code,
        message: registration.message,
      };
      return this.phase;
    }
    this.token = this.nextToken();
    return this.send();
  }

  private async send(): Promise<SubmitPhase> {
    if (this.draft === null || this.token === null) {
      throw new Error("no draft to send");
    }
    const outcome = await this.api.command(
      this.sessionId,
      "record_finding",
      draftParams(this.draft),
      this.token,
    );
    this.phase = interpret(outcome);
    return this.phase;
  }
}

function draftParams(draft: FindingDraft): Record<string, unknown> {
  const params: Record<string, unknown> = {
    cell: draft.cell,
    hazard: draft.hazard,
  };
  if (draft.scenario !== undefined) params["scenario"] = draft.scenario;
  if (draft.notes !== undefined) params["notes"] = draft.notes;
  if (draft.classification !== undefined) params["classification"] = draft.classification;
  if (draft.distinct_presentation !== undefined) {
    params["distinct_presentation"] = draft.distinct_presentation;
  }
  return params;
}

function interpret(outcome: CommandOutcome): SubmitPhase {
  if (outcome.ok) {
    return {
      kind: "accepted",
      finding: outcome.result as FindingDto,
      seq: outcome.seq,
    };
  }
  if (outcome.code === "CONFLICT_DUPLICATE_FINDING") {
    return {
      kind: "conflict",
      existingId: String(outcome.details["existing_id"] ?? ""),
      hazard: String(outcome.details["hazard"] ?? ""),
      scope: String(outcome.details["scope"] ?? ""),
      message: outcome.message,
    };
  }
  if (outcome.code === "UNRESOLVED_HAZARD") {
    return {
      kind: "unresolved",
      name: String(outcome.details["name"] ?? ""),
      message: outcome.message,
    };
  }
  return { kind: "rejected", code: outcome.code, message: outcome.message };
}
