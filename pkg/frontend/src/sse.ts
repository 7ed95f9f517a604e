// Server-sent event parsing over fetch streaming. Node 20 (the test runtime)
// has no global EventSource, and the board needs the raw data lines anyway to
// guarantee byte-faithful journal reconstruction, so this is a small parser of
// the SSE wire format rather than a wrapper around a browser API.

import type { JournalEvent } from "./types.js";

export interface SseMessage {
  event: string;
  id: string | null;
  data: string;
}

export class SseParser {
  private buffer = "";
  private eventType = "";
  private dataLines: string[] = [];
  private id: string | null = null;
  lastEventId: string | null = null;

  // Feed decoded text, get every message completed by it. Partial lines and
  // partial messages stay buffered for the next chunk.
  feed(chunk: string): SseMessage[] {
    this.buffer += chunk;
    const messages: SseMessage[] = [];
    for (;;) {
      const line = this.takeLine();
      if (line === null) {
        return messages;
      }
      const message = this.handleLine(line);
      if (message !== null) {
        messages.push(message);
      }
    }
  }

  private takeLine(): string | null {
    const nl = this.buffer.indexOf("\n");
    const cr = this.buffer.indexOf("\r");
    if (nl === -1 && cr === -1) {
      return null;
    }
    if (cr !== -1 && (nl === -1 || cr < nl)) {
      // a CR at the very end may be half of a CRLF still in flight
      if (cr === this.buffer.length - 1) {
        return null;
      }
      const line = this.buffer.slice(0, cr);
      const skip = this.buffer[cr + 1] === "\n" ? 2 : 1;
      this.buffer = this.buffer.slice(cr + skip);
      return line;
    }
    const line = this.buffer.slice(0, nl);
    this.buffer = this.buffer.slice(nl + 1);
    return line;
  }

  private handleLine(line: string): SseMessage | null {
    if (line === "") {
      return this.dispatch();
    }
    if (line.startsWith(":")) {
      return null; // comment, e.g. keepalives
    }
    const colon = line.indexOf(":");
    const name = colon === -1 ? line : line.slice(0, colon);
    let value = colon === -1 ? "" : line.slice(colon + 1);
    if (value.startsWith(" ")) {
      value = value.slice(1);
    }
    switch (name) {
      case "event":
        this.eventType = value;
        break;
      case "data":
        this.dataLines.push(value);
        break;
      case "id":
        if (!value.includes("\0")) {
          this.id = value;
          this.lastEventId = value;
        }
        break;
      default:
        break; // unknown fields (incl. retry) are ignored
    }
    return null;
  }

  private dispatch(): SseMessage | null {
    if (this.dataLines.length === 0) {
      this.eventType = "";
      return null;
    }
    const message: SseMessage = {
      event: this.eventType || "message",
      id: this.id,
      data: this.dataLines.join("\n"),
    };
    this.eventType = "";
    this.dataLines = [];
    return message;
  }
}

const EVENT_KINDS = new Set([
  "SESSION_STARTED",
  "CELL_OPENED",
  "FINDING_RECORDED",
  "FINDING_LINKED",
  "CELL_MARKED",
  "HAZARD_REGISTERED",
  "NOTE_ADDED",
  "SESSION_CLOSED",
]);

// A non-header message's data field is one journal line.
export function decodeEvent(message: SseMessage): JournalEvent {
  const raw: unknown = JSON.parse(message.data);
  if (typeof raw !== "object" || raw === null) {
    throw new Error("event data is not an object");
  }
  const record = raw as Record<string, unknown>;
  const seq = record["seq"];
  const kind = record["kind"];
  const payload = record["payload"];
  if (typeof seq !== "number" || !Number.isInteger(seq) || seq < 1) {
    throw new Error(`event has no valid seq: ${message.data}`);
  }
  if (typeof kind !== "string" || !EVENT_KINDS.has(kind)) {
    throw new Error(`unknown event kind ${String(kind)}`);
  }
  if (typeof payload !== "object" || payload === null) {
    throw new Error(`event ${seq} has no payload object`);
  }
  return {
    seq,
    kind: kind as JournalEvent["kind"],
    payload: payload as Record<string, unknown>,
    at: typeof record["at"] === "string" ? (record["at"] as string) : "",
  };
}

export interface StreamOptions {
  fromSeq?: number;
  follow?: boolean;
  signal?: AbortSignal;
  fetchImpl?: typeof fetch;
}

// Subscribe to a session's event stream. Yields every SSE message, header
// included; callers filter on message.event. Ends when the server drains the
// journal (follow=false) or the signal aborts.
export async function* streamEvents(
  baseUrl: string,
  sessionId: string,
  options: StreamOptions = {},
): AsyncGenerator<SseMessage, void, void> {
  const fetchImpl = options.fetchImpl ?? fetch;
  const fromSeq = options.fromSeq ?? 1;
  const follow = options.follow ?? false;
  const url =
    `${baseUrl}/v1/sessions/${encodeURIComponent(sessionId)}/events` +
    `?from_seq=${fromSeq}&follow=${follow}`;
  const response = await fetchImpl(url, {
    signal: options.signal,
    headers: { accept: "text/event-stream" },
  });
  if (!response.ok || response.body === null) {
    throw new Error(`event stream failed with status ${response.status}`);
  }
  const reader = response.body.getReader();
  const decoder = new TextDecoder();
  const parser = new SseParser();
  try {
    for (;;) {
      const { done, value } = await reader.read();
      if (done) {
        break;
      }
      for (const message of parser.feed(decoder.decode(value, { stream: true }))) {
        yield message;
      }
    }
    for (const message of parser.feed(decoder.decode())) {
      yield message;
    }
  } finally {
    try {
      await reader.cancel();
    } catch {
      // stream already finished or torn down by the abort
    }
  }
}

// Reassemble journal file content from stream messages: each data field is one
// journal line. Feeding messages from from_seq=1 reproduces the file exactly.
export function journalText(messages: Iterable<SseMessage>): string {
  let text = "";
  for (const message of messages) {
    text += message.data + "\n";
  }
  return text;
}
