// Wiring: connect the API client, event stream, reducer, and renderer.

import { ApiClient, ApiFailure, EventStream } from "./api.js";
import { defaultAnalysisJob } from "./metrics.js";
import {
  applyMessage,
  initialViewState,
  resolveClick,
  type ViewState,
} from "./state.js";
import { render, renderParseErrors } from "./render.js";

const TIC_TAC_TOE = `(game "Tic-Tac-Toe"
  (mode 2 (addToEmpty))
  (equipment {
    (board (square 3) (square))
    (ball P1)
    (cross P2)
  }
  )
  (rules
    (play (to (mover) (empty)))
    (end (line length:3) (result (mover) Win))
  )
)`;

const api = new ApiClient("");
let view: ViewState = initialViewState();
let stream: EventStream | null = null;
let currentLudText = TIC_TAC_TOE;

function update(mutate: (v: ViewState) => ViewState): void {
  view = mutate(view);
  const root = document.getElementById("app");
  if (root) render(root, view, { onCellClick: handleCellClick });
}

function setNotice(text: string | null): void {
  update((v) => ({ ...v, notice: text }));
}

async function loadGame(ludText: string): Promise<void> {
  const errorsEl = document.getElementById("parse-errors");
  if (errorsEl) errorsEl.replaceChildren();
  stream?.close();
  update(() => ({ ...initialViewState(), connection: "connecting", busy: true }));
  try {
    const session = await api.createSession(ludText, "P1");
    currentLudText = ludText;
    update((v) => {
      const next = {
        ...v,
        sessionId: session.sessionId,
        gameName: session.name,
        board: session.board,
        humanSeat: session.humanSeat,
        busy: false,
      };
      return applyMessage(next, session.state);
    });
    stream = new EventStream(
      api.eventsUrl(session.sessionId, window.location),
      (message) => update((v) => applyMessage(v, message)),
      (status) => update((v) => ({ ...v, connection: status })),
    );
    stream.connect();
  } catch (err) {
    update((v) => ({ ...v, busy: false, connection: "error" }));
    if (err instanceof ApiFailure) {
      if (err.body.code === "parse-error" && errorsEl && err.body.errors) {
        renderParseErrors(errorsEl, err.body.errors);
        setNotice("The rule text does not parse; see the issues below.");
      } else if (err.body.code === "partial-game") {
        setNotice(
          "This is a partial game (it contains holes). Complete it with the " +
            "reconstruction workflow (`ludekit reconstruct`) before playing.",
        );
      } else {
        setNotice(err.body.message);
      }
    } else {
      setNotice("Server unreachable; check the service and retry.");
    }
  }
}

async function handleCellClick(site: number): Promise<void> {
  if (!view.sessionId || view.busy) return;
  const outcome = resolveClick(view, site);
  if (outcome.select !== undefined) {
    update((v) => ({ ...v, selectedSource: outcome.select ?? null, notice: outcome.explain ?? null }));
    return;
  }
  if (!outcome.move) {
    setNotice(outcome.explain ?? "No legal move uses that site.");
    return;
  }
  update((v) => ({ ...v, busy: true, notice: null }));
  try {
    // State updates arrive through the event stream; the POST response is
    // only used to re-enable input (and surface rejections).
    await api.submitMove(view.sessionId, outcome.move);
    update((v) => ({ ...v, busy: false }));
  } catch (err) {
    update((v) => ({ ...v, busy: false, selectedSource: null }));
    if (err instanceof ApiFailure && err.body.code === "illegal-move") {
      setNotice("Illegal move; the highlighted sites are the server's legal destinations.");
    } else if (err instanceof ApiFailure) {
      setNotice(err.body.message);
    } else {
      setNotice("Connection problem while sending the move.");
    }
  }
}

async function triggerAnalysis(): Promise<void> {
  if (!view.sessionId) return;
  try {
    const start = await api.startAnalysis(defaultAnalysisJob(currentLudText), view.sessionId);
    update((v) => ({ ...v, metrics: null, analysis: { jobId: start.jobId, done: 0, total: start.total } }));
    // progress and the final report arrive over the event stream; polling
    // covers the case where the socket dropped
    const poll = async (): Promise<void> => {
      if (!view.analysis || view.analysis.jobId !== start.jobId) return;
      const status = await api.pollAnalysis(start.jobId);
      if (status.status === "done" && status.report) {
        update((v) => ({ ...v, analysis: null, metrics: status.report ?? null }));
      } else if (status.status === "running") {
        setTimeout(poll, 1000);
      }
    };
    setTimeout(poll, 1500);
  } catch (err) {
    setNotice(err instanceof ApiFailure ? err.body.message : "Analysis request failed.");
  }
}

function init(): void {
  const textarea = document.getElementById("lud-text") as HTMLTextAreaElement | null;
  if (textarea) textarea.value = TIC_TAC_TOE;
  document.getElementById("load")?.addEventListener("click", () => {
    void loadGame(textarea?.value ?? TIC_TAC_TOE);
  });
  document.getElementById("analyze")?.addEventListener("click", () => {
    void triggerAnalysis();
  });
  void loadGame(TIC_TAC_TOE);
}

document.addEventListener("DOMContentLoaded", init);
