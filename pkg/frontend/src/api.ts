// Thin HTTP client over the session service. The client computes nothing
// game-related itself; every decision surface comes from server payloads.

import type {
  AnalysisPoll,
  AnalysisStart,
  ApiError,
  CreateSessionResponse,
  MoveResponse,
  SessionMessage,
  WireMove,
} from "./types.js";

export class ApiFailure extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiError,
  ) {
    super(`${status}: ${body.message ?? body.code}`);
  }
}

async function request<T>(base: string, path: string, init?: RequestInit): Promise<T> {
  const response = await fetch(base + path, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  const body = await response.json();
  if (!response.ok) {
    throw new ApiFailure(response.status, body as ApiError);
  }
  return body as T;
}

export class ApiClient {
  constructor(public readonly base: string = "") {}

  createSession(
    ludText: string,
    humanSeat: string | null = "P1",
    aiConfig: Record<string, unknown> | null = { kind: "uct", iterationBudget: 1000 },
  ): Promise<CreateSessionResponse> {
    return request(this.base, "/sessions", {
      method: "POST",
      body: JSON.stringify({ ludText, humanSeat, aiConfig }),
    });
  }

  getSession(sessionId: string): Promise<CreateSessionResponse> {
    return request(this.base, `/sessions/${sessionId}`);
  }

  getLegalMoves(sessionId: string): Promise<{ sessionId: string; legalMoves: WireMove[] }> {
    return request(this.base, `/sessions/${sessionId}/moves`);
  }

  submitMove(sessionId: string, move: WireMove): Promise<MoveResponse> {
    return request(this.base, `/sessions/${sessionId}/moves`, {
      method: "POST",
      body: JSON.stringify({ move }),
    });
  }

  startAnalysis(job: Record<string, unknown>, sessionId?: string): Promise<AnalysisStart> {
    return request(this.base, "/analysis", {
      method: "POST",
      body: JSON.stringify({ job, sessionId }),
    });
  }

  pollAnalysis(jobId: string): Promise<AnalysisPoll> {
    return request(this.base, `/analysis/${jobId}`);
  }

  eventsUrl(sessionId: string, location: { protocol: string; host: string }): string {
    const scheme = location.protocol === "https:" ? "wss" : "ws";
    return `${scheme}://${location.host}/sessions/${sessionId}/events`;
  }
}

export type EventHandler = (message: SessionMessage) => void;

// Minimal WebSocket wrapper so the wiring layer stays declarative.
export class EventStream {
  private socket: WebSocket | null = null;

  constructor(
    private readonly url: string,
    private readonly onMessage: EventHandler,
    private readonly onStatus: (status: "open" | "closed" | "error") => void,
  ) {}

  connect(): void {
    this.socket = new WebSocket(this.url);
    this.socket.onopen = () => this.onStatus("open");
    this.socket.onclose = () => this.onStatus("closed");
    this.socket.onerror = () => this.onStatus("error");
    this.socket.onmessage = (event) => {
      this.onMessage(JSON.parse(event.data as string) as SessionMessage);
    };
  }

  close(): void {
    this.socket?.close();
    this.socket = null;
  }
}
