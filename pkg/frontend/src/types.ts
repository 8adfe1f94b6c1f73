// Wire schemas, mirroring the session service payloads.

export interface WireMove {
  kind: string;
  from: number | null;
  to: number | null;
  captures: number[];
}

export interface SitePiece {
  player: string;
  piece: string;
}

export interface WireState {
  moveNumber: number;
  mover: string | null;
  status: string; // "ongoing" | "win" | "draw" | "timeout"
  winner: string | null;
  pendingDice: number | null;
  sites: (SitePiece | null)[];
  pools: Record<string, Record<string, number>>;
  borneOff: Record<string, number>;
  legalMoves: WireMove[];
}

export interface SessionMessage {
  type: string; // state | movePlayed | analysisProgress | analysisDone | error
  sessionId: string;
  seq: number;
  state?: WireState;
  move?: WireMove;
  by?: string;
  jobId?: string;
  done?: number;
  total?: number;
  report?: MetricsReport;
}

export interface TrackMeta {
  sites: number[];
  bearOff: boolean;
}

export interface BoardMeta {
  rows: number;
  cols: number;
  siteCount: number;
  tracks: Record<string, TrackMeta>;
}

export interface CreateSessionResponse {
  sessionId: string;
  createdAt?: string;
  humanSeat: string | null;
  board: BoardMeta;
  name: string;
  state: SessionMessage;
}

export interface MoveResponse {
  sessionId: string;
  messages: SessionMessage[];
}

export interface MetricsReport {
  metricsVersion: number;
  games: number;
  completed: number;
  decided: number;
  balance: number;
  balanceCI: number;
  sideBalance: number;
  drawishness: number;
  completionRate: number;
  durationMean: number;
  durationStd: number;
  decisiveness: number | null;
  uncertainty: number | null;
  drama: number | null;
  strategicDepth: number | null;
  complexity: number;
  flags: string[];
}

export interface ParseIssue {
  code: string;
  message: string;
  line: number;
  col: number;
}

export interface ApiError {
  code: string;
  message: string;
  errors?: ParseIssue[];
  legalMoves?: WireMove[];
  holeCount?: number;
}

export interface AnalysisStart {
  jobId: string;
  total: number;
}

export interface AnalysisPoll {
  jobId: string;
  status: "running" | "done" | "error";
  done?: number;
  total?: number;
  progress?: number;
  report?: MetricsReport;
  message?: string;
}
