import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";

interface Recorded {
  url: string;
  init: RequestInit | undefined;
}

function stubFetch(
  responses: Array<{ status: number; body: unknown }>,
): { fetchImpl: typeof fetch; requests: Recorded[] } {
  const requests: Recorded[] = [];
  const queue = [...responses];
  const fetchImpl = ((input: RequestInfo | URL, init?: RequestInit) => {
    requests.push({ url: String(input), init });
    const next = queue.shift();
    if (next === undefined) {
      return Promise.reject(new Error("stub fetch ran out of responses"));
    }
    return Promise.resolve(
      new Response(JSON.stringify(next.body), {
        status: next.status,
        headers: { "content-type": "application/json" },
      }),
    );
  }) as typeof fetch;
  return { fetchImpl, requests };
}

describe("ApiClient", () => {
  it("builds /v1 urls and unwraps list envelopes", async () => {
    const { fetchImpl, requests } = stubFetch([
      { status: 200, body: { sessions: [{ session_id: "s1" }] } },
    ]);
    const api = new ApiClient("http://svc:1", fetchImpl);
    const sessions = await api.listSessions();
    expect(requests[0]?.url).toBe("http://svc:1/v1/sessions");
    expect(sessions).toEqual([{ session_id: "s1" }]);
  });

  it("returns a typed success outcome for commands", async () => {
    const { fetchImpl, requests } = stubFetch([
      { status: 200, body: { ok: true, seq: 2, result: { cell: "MORE/Soc1", status: "OPEN" } } },
    ]);
    const api = new ApiClient("http://svc:1", fetchImpl);
    const outcome = await api.command("s1", "open_cell", { cell: "MORE/Soc1" }, "tok");
    expect(outcome).toEqual({
      ok: true,
      status: 200,
      seq: 2,
      result: { cell: "MORE/Soc1", status: "OPEN" },
    });
    const sent = JSON.parse(String(requests[0]?.init?.body));
    expect(sent).toEqual({
      command: "open_cell",
      params: { cell: "MORE/Soc1" },
      idempotency_token: "tok",
    });
  });

  it("returns the error envelope as a typed failure outcome", async () => {
    const { fetchImpl } = stubFetch([
      {
        status: 409,
        body: {
          error: {
            code: "CONFLICT_DUPLICATE_FINDING",
            message: "already recorded as F01",
            details: { existing_id: "F01" },
          },
        },
      },
    ]);
    const api = new ApiClient("http://svc:1", fetchImpl);
    const outcome = await api.command("s1", "record_finding", { cell: "x", hazard: "y" });
    expect(outcome).toEqual({
      ok: false,
      status: 409,
      code: "CONFLICT_DUPLICATE_FINDING",
      message: "already recorded as F01",
      details: { existing_id: "F01" },
    });
  });

  it("omits the token field when none is supplied", async () => {
    const { fetchImpl, requests } = stubFetch([
      { status: 200, body: { ok: true, seq: 3, result: {} } },
    ]);
    const api = new ApiClient("http://svc:1", fetchImpl);
    await api.command("s1", "close_session", {});
    const sent = JSON.parse(String(requests[0]?.init?.body));
    expect("idempotency_token" in sent).toBe(false);
  });

  it("throws on read-endpoint errors with the service's code and message", async () => {
    const { fetchImpl } = stubFetch([
      {
        status: 404,
        body: { error: { code: "NOT_FOUND", message: "session 's9' does not exist", details: {} } },
      },
    ]);
    const api = new ApiClient("http://svc:1", fetchImpl);
    await expect(api.coverage("s9")).rejects.toThrow("NOT_FOUND: session 's9' does not exist");
  });

  it("fetches reports as plain text", async () => {
    const requests: Recorded[] = [];
    const fetchImpl = ((input: RequestInfo | URL, init?: RequestInit) => {
      requests.push({ url: String(input), init });
      return Promise.resolve(new Response("Guide word,Ethical hazard,Notes\n", { status: 200 }));
    }) as typeof fetch;
    const api = new ApiClient("http://svc:1", fetchImpl);
    const report = await api.report("s1", "Soc1", "csv");
    expect(report).toBe("Guide word,Ethical hazard,Notes\n");
    expect(requests[0]?.url).toBe(
      "http://svc:1/v1/sessions/s1/report?subject=Soc1&format=csv",
    );
  });
});
