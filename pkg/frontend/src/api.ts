// Typed client for the /v1 service. Command failures are data (CommandOutcome),
// not exceptions: the conflict dialog is a normal flow, not an error path.
// Only transport failures and unusable responses throw.

import type {
  ApiErrorBody,
  CellInfo,
  CommandAccepted,
  CommandOutcome,
  CoverageDto,
  FindingDto,
  SessionInfo,
} from "./types.js";

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  private url(path: string): string {
    return `${this.baseUrl}/v1${path}`;
  }

  private async getJson<T>(path: string): Promise<T> {
    const response = await this.fetchImpl(this.url(path));
    if (!response.ok) {
      const body = (await response.json()) as ApiErrorBody;
      throw new Error(`${body.error.code}: ${body.error.message}`);
    }
    return (await response.json()) as T;
  }

  async listSessions(): Promise<SessionInfo[]> {
    const body = await this.getJson<{ sessions: SessionInfo[] }>("/sessions");
    return body.sessions;
  }

  async session(sessionId: string): Promise<SessionInfo> {
    return this.getJson<SessionInfo>(`/sessions/${encodeURIComponent(sessionId)}`);
  }

  async cells(sessionId: string): Promise<CellInfo[]> {
    const body = await this.getJson<{ cells: CellInfo[] }>(
      `/sessions/${encodeURIComponent(sessionId)}/cells`,
    );
    return body.cells;
  }

  async coverage(sessionId: string): Promise<CoverageDto> {
    return this.getJson<CoverageDto>(
      `/sessions/${encodeURIComponent(sessionId)}/coverage`,
    );
  }

  async findings(sessionId: string): Promise<FindingDto[]> {
    const body = await this.getJson<{ findings: FindingDto[] }>(
      `/sessions/${encodeURIComponent(sessionId)}/findings`,
    );
    return body.findings;
  }

  async summary(sessionId: string): Promise<Record<string, unknown>> {
    return this.getJson<Record<string, unknown>>(
      `/sessions/${encodeURIComponent(sessionId)}/summary`,
    );
  }

  async report(sessionId: string, subject = "all", format = "csv"): Promise<string> {
    const response = await this.fetchImpl(
      this.url(
        `/sessions/${encodeURIComponent(sessionId)}/report` +
          `?subject=${encodeURIComponent(subject)}&format=${format}`,
      ),
    );
    if (!response.ok) {
      const body = (await response.json()) as ApiErrorBody;
      throw new Error(`${body.error.code}: ${body.error.message}`);
    }
    return response.text();
  }

  async command(
    sessionId: string,
    command: string,
    params: Record<string, unknown>,
    idempotencyToken?: string,
  ): Promise<CommandOutcome> {
    const body: Record<string, unknown> = { command, params };
    if (idempotencyToken !== undefined) {
      body["idempotency_token"] = idempotencyToken;
    }
    const response = await this.fetchImpl(
      this.url(`/sessions/${encodeURIComponent(sessionId)}/commands`),
      {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      },
    );
    const payload: unknown = await response.json();
    if (response.ok) {
      const accepted = payload as CommandAccepted;
      return { ok: true, status: response.status, seq: accepted.seq, result: accepted.result };
    }
    const failure = payload as ApiErrorBody;
    return {
      ok: false,
      status: response.status,
      code: failure.error.code,
      message: failure.error.message,
      details: failure.error.details ?? {},
    };
  }
}
