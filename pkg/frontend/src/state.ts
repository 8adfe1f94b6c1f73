// View-state reducer: every change flows from a server message, so the
// rendered board can never drift ahead of the server's authority.

import type {
  BoardMeta,
  MetricsReport,
  SessionMessage,
  WireMove,
  WireState,
} from "./types.js";

export type Connection = "idle" | "connecting" | "open" | "closed" | "error";

export interface HistoryEntry {
  by: string;
  move: WireMove;
}

export interface AnalysisProgress {
  jobId: string;
  done: number;
  total: number;
}

export interface ViewState {
  sessionId: string | null;
  gameName: string;
  board: BoardMeta | null;
  humanSeat: string | null;
  current: WireState | null;
  lastSeq: number;
  history: HistoryEntry[];
  connection: Connection;
  busy: boolean; // a command is in flight; input disabled
  notice: string | null; // last rejection/explanation
  metrics: MetricsReport | null;
  analysis: AnalysisProgress | null;
  selectedSource: number | null;
}

export function initialViewState(): ViewState {
  return {
    sessionId: null,
    gameName: "",
    board: null,
    humanSeat: null,
    current: null,
    lastSeq: 0,
    history: [],
    connection: "idle",
    busy: false,
    notice: null,
    metrics: null,
    analysis: null,
    selectedSource: null,
  };
}

/** Apply one server message; stale or duplicate sequence numbers are ignored. */
export function applyMessage(view: ViewState, message: SessionMessage): ViewState {
  if (view.sessionId !== null && message.sessionId !== view.sessionId) {
    return view;
  }
  if (message.seq <= view.lastSeq) {
    return view;
  }
  const next: ViewState = { ...view, lastSeq: message.seq };
  switch (message.type) {
    case "state":
      next.current = message.state ?? view.current;
      break;
    case "movePlayed":
      next.current = message.state ?? view.current;
      next.history = message.move
        ? [...view.history, { by: message.by ?? "?", move: message.move }]
        : view.history;
      next.selectedSource = null;
      break;
    case "analysisProgress":
      next.analysis = {
        jobId: message.jobId ?? "",
        done: message.done ?? 0,
        total: message.total ?? 0,
      };
      break;
    case "analysisDone":
      next.analysis = null;
      next.metrics = message.report ?? view.metrics;
      break;
    default:
      break;
  }
  return next;
}

export function isHumansTurn(view: ViewState): boolean {
  return (
    view.current !== null &&
    view.current.status === "ongoing" &&
    view.humanSeat !== null &&
    view.current.mover === view.humanSeat
  );
}

/** Destination sites of the server's legal moves; the only highlight source. */
export function legalDestinations(view: ViewState): Set<number> {
  const out = new Set<number>();
  for (const move of view.current?.legalMoves ?? []) {
    if (move.to !== null) out.add(move.to);
  }
  return out;
}

/** Source sites among the server's legal moves (movement games). */
export function legalSources(view: ViewState): Set<number> {
  const out = new Set<number>();
  for (const move of view.current?.legalMoves ?? []) {
    if (move.from !== null) out.add(move.from);
  }
  return out;
}

export interface ClickOutcome {
  move?: WireMove;
  select?: number | null;
  explain?: string;
}

/**
 * Resolve a site click into a move, a piece selection, or an explanation.
 * Placement moves need one click; movement moves need source then target.
 */
export function resolveClick(view: ViewState, site: number): ClickOutcome {
  const legal = view.current?.legalMoves ?? [];
  if (!isHumansTurn(view)) {
    return { explain: "It is not your turn." };
  }
  if (view.selectedSource !== null) {
    const move = legal.find((m) => m.from === view.selectedSource && m.to === site);
    if (move) return { move };
    if (legalSources(view).has(site)) return { select: site };
    return { select: null, explain: "That destination is not legal for the selected piece." };
  }
  const placement = legal.find((m) => m.from === null && m.to === site);
  if (placement) return { move: placement };
  if (legalSources(view).has(site)) return { select: site };
  return { explain: "No legal move uses that site." };
}

export function statusBanner(view: ViewState): string {
  const state = view.current;
  if (!state) return "No game loaded.";
  if (state.status === "ongoing") {
    const dice = state.pendingDice !== null ? ` (dice: ${state.pendingDice})` : "";
    if (view.humanSeat === null) return `${state.mover} to move${dice}.`;
    return state.mover === view.humanSeat
      ? `Your move (${state.mover})${dice}.`
      : `Waiting for ${state.mover}${dice}.`;
  }
  if (state.status === "draw") return "Game over: draw.";
  if (state.status === "timeout") return "Game over: move cap reached.";
  if (view.humanSeat === null) return `Game over: ${state.winner} wins.`;
  return state.winner === view.humanSeat ? "Game over: you win." : `Game over: ${state.winner} wins.`;
}
