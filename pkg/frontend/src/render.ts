// DOM rendering. Deliberately thin: read the view state, write elements.

import { boardCells, pieceGlyph } from "./board.js";
import { metricsRows } from "./metrics.js";
import { statusBanner, type ViewState } from "./state.js";

export interface Handlers {
  onCellClick: (site: number) => void;
}

export function render(root: HTMLElement, view: ViewState, handlers: Handlers): void {
  const banner = root.querySelector<HTMLElement>("#banner");
  if (banner) {
    banner.textContent = statusBanner(view);
  }

  const connection = root.querySelector<HTMLElement>("#connection");
  if (connection) {
    connection.textContent = view.connection;
    connection.dataset.state = view.connection;
  }

  const notice = root.querySelector<HTMLElement>("#notice");
  if (notice) {
    notice.textContent = view.notice ?? "";
    notice.hidden = view.notice === null;
  }

  const boardEl = root.querySelector<HTMLElement>("#board");
  if (boardEl) {
    boardEl.replaceChildren();
    if (view.board) {
      boardEl.style.gridTemplateColumns = `repeat(${view.board.cols}, 3rem)`;
      for (const cell of boardCells(view)) {
        const el = document.createElement("button");
        el.className = "cell";
        el.dataset.site = String(cell.site);
        if (cell.highlight) el.classList.add("highlight");
        if (cell.selectable) el.classList.add("selectable");
        if (cell.selected) el.classList.add("selected");
        if (cell.trackOf.length) el.classList.add("track");
        if (cell.piece) el.classList.add(cell.piece.player.toLowerCase());
        el.textContent = pieceGlyph(cell.piece);
        el.disabled = view.busy || view.current?.status !== "ongoing";
        el.addEventListener("click", () => handlers.onCellClick(cell.site));
        boardEl.appendChild(el);
      }
    }
  }

  const historyEl = root.querySelector<HTMLElement>("#history");
  if (historyEl) {
    historyEl.replaceChildren();
    view.history.forEach((entry, i) => {
      const li = document.createElement("li");
      const to = entry.move.to === null ? "off" : entry.move.to;
      const from = entry.move.from === null ? "" : `${entry.move.from} → `;
      li.textContent = `${i + 1}. ${entry.by} ${entry.move.kind} ${from}${to}`;
      historyEl.appendChild(li);
    });
  }

  const pools = root.querySelector<HTMLElement>("#pools");
  if (pools) {
    const state = view.current;
    if (state && (Object.keys(state.pools.P1 ?? {}).length || Object.keys(state.pools.P2 ?? {}).length)) {
      pools.hidden = false;
      pools.textContent =
        `pool P1 ${JSON.stringify(state.pools.P1)}  off ${state.borneOff.P1}` +
        ` | pool P2 ${JSON.stringify(state.pools.P2)}  off ${state.borneOff.P2}`;
    } else {
      pools.hidden = true;
    }
  }

  const panel = root.querySelector<HTMLElement>("#metrics");
  if (panel) {
    panel.replaceChildren();
    if (view.analysis) {
      const bar = document.createElement("progress");
      bar.max = view.analysis.total;
      bar.value = view.analysis.done;
      const label = document.createElement("span");
      label.textContent = `analysis ${view.analysis.done}/${view.analysis.total}`;
      panel.append(bar, label);
    } else if (view.metrics) {
      const table = document.createElement("table");
      for (const row of metricsRows(view.metrics)) {
        const tr = document.createElement("tr");
        const th = document.createElement("th");
        th.textContent = row.label;
        const td = document.createElement("td");
        td.textContent = row.value;
        tr.append(th, td);
        table.appendChild(tr);
      }
      panel.appendChild(table);
    }
  }
}

export function renderParseErrors(
  container: HTMLElement,
  errors: { line: number; col: number; code: string; message: string }[],
): void {
  container.replaceChildren();
  for (const issue of errors) {
    const li = document.createElement("li");
    li.textContent = `${issue.line}:${issue.col} ${issue.code}: ${issue.message}`;
    container.appendChild(li);
  }
}
