// Thin client over the documented service endpoints. Works in the browser
// (native fetch / WebSocket) and under node tests (injected implementations).

import type {
  ChannelFrame,
  ExplanationPayload,
  KbUploadResult,
  SessionRequest,
  StateSnapshot,
  TurnResponse,
} from "./types.js";

type FetchLike = typeof fetch;

export interface WebSocketLike {
  onopen: ((ev?: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev?: unknown) => void) | null;
  onerror: ((ev?: unknown) => void) | null;
  send(data: string): void;
  close(): void;
}

export type WebSocketCtor = new (url: string) => WebSocketLike;

export class ServiceError extends Error {
  constructor(
    public status: number,
    public code: string,
    detail: string,
  ) {
    super(`${code}: ${detail}`);
  }
}

export interface ClientOptions {
  baseUrl: string;
  fetchImpl?: FetchLike;
  webSocketImpl?: WebSocketCtor;
}

export class ServiceClient {
  readonly baseUrl: string;
  private fetchImpl: FetchLike;
  private webSocketImpl: WebSocketCtor;

  constructor(options: ClientOptions) {
    this.baseUrl = options.baseUrl.replace(/\/$/, "");
    this.fetchImpl = options.fetchImpl ?? fetch.bind(globalThis);
    this.webSocketImpl =
      options.webSocketImpl ?? ((globalThis as { WebSocket?: WebSocketCtor }).WebSocket as WebSocketCtor);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: body === undefined ? undefined : { "content-type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const data = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      throw new ServiceError(
        response.status,
        String(data.error ?? "unknown"),
        String(data.detail ?? response.statusText),
      );
    }
    return data as T;
  }

  uploadKb(document: unknown, kbId?: string): Promise<KbUploadResult> {
    const query = kbId ? `?kb_id=${encodeURIComponent(kbId)}` : "";
    return this.request("POST", `/kbs${query}`, document);
  }

  async createSession(request: SessionRequest): Promise<string> {
    const data = await this.request<{ session_id: string }>("POST", "/sessions", request);
    return data.session_id;
  }

  sendTurn(sessionId: string, utterance: string): Promise<TurnResponse> {
    return this.request("POST", `/sessions/${sessionId}/turns`, { utterance });
  }

  getState(sessionId: string): Promise<StateSnapshot> {
    return this.request("GET", `/sessions/${sessionId}/state`);
  }

  getExplanation(sessionId: string, decisionId: string): Promise<ExplanationPayload> {
    return this.request(
      "GET",
      `/sessions/${sessionId}/decisions/${encodeURIComponent(decisionId)}/explanation`,
    );
  }

  openTicks(
    sessionId: string,
    steps: number,
    intervalMs: number,
    onFrame: (frame: ChannelFrame) => void,
    onClose?: () => void,
  ): TickChannel {
    const wsBase = this.baseUrl.replace(/^http/, "ws");
    const url = `${wsBase}/sessions/${sessionId}/ticks?steps=${steps}&interval_ms=${intervalMs}`;
    return new TickChannel(url, this.webSocketImpl, onFrame, onClose);
  }
}

// Bidirectional tick channel: the server streams tick records and a final
// summary; the client may interleave pause / resume / utterance / settings
// commands. The last tick seen is tracked so a dropped stream can be
// resumed by reopening with the remaining step count.
export class TickChannel {
  lastTick: number | null = null;
  ticksSeen = 0;
  finished = false;
  private socket: WebSocketLike;

  constructor(
    url: string,
    webSocketImpl: WebSocketCtor,
    onFrame: (frame: ChannelFrame) => void,
    onClose?: () => void,
  ) {
    this.socket = new webSocketImpl(url);
    this.socket.onmessage = (event) => {
      const frame = JSON.parse(String(event.data)) as ChannelFrame;
      if (frame.kind === "tick") {
        this.lastTick = frame.tick;
        this.ticksSeen += 1;
      }
      if (frame.kind === "summary") {
        this.finished = true;
      }
      onFrame(frame);
    };
    this.socket.onclose = () => onClose?.();
    this.socket.onerror = () => this.socket.close();
  }

  private command(cmd: Record<string, unknown>): void {
    this.socket.send(JSON.stringify(cmd));
  }

  pause(): void {
    this.command({ cmd: "pause" });
  }

  resume(): void {
    this.command({ cmd: "resume" });
  }

  sendUtterance(text: string): void {
    this.command({ cmd: "utterance", text });
  }

  setSettings(settings: { theta?: number; policy?: string }): void {
    this.command({ cmd: "set", ...settings });
  }

  stop(): void {
    this.command({ cmd: "stop" });
  }

  close(): void {
    this.socket.close();
  }
}
