// Board rendering model: a row-major cell grid derived entirely from the
// server's board metadata and current state message.

import { legalDestinations, legalSources, type ViewState } from "./state.js";
import type { SitePiece } from "./types.js";

export interface CellModel {
  site: number;
  row: number;
  col: number;
  piece: SitePiece | null;
  highlight: boolean; // legal destination per the server
  selectable: boolean; // legal source per the server
  selected: boolean;
  trackOf: string[]; // players whose track passes through this site
}

export function boardCells(view: ViewState): CellModel[] {
  const board = view.board;
  const state = view.current;
  if (!board || !state) return [];
  const destinations = legalDestinations(view);
  const sources = legalSources(view);
  const trackOf = new Map<number, string[]>();
  for (const [player, track] of Object.entries(board.tracks ?? {})) {
    for (const site of track.sites) {
      trackOf.set(site, [...(trackOf.get(site) ?? []), player]);
    }
  }
  const cells: CellModel[] = [];
  for (let site = 0; site < board.siteCount; site += 1) {
    cells.push({
      site,
      row: Math.floor(site / board.cols),
      col: site % board.cols,
      piece: state.sites[site] ?? null,
      highlight: destinations.has(site),
      selectable: sources.has(site),
      selected: view.selectedSource === site,
      trackOf: trackOf.get(site) ?? [],
    });
  }
  return cells;
}

const GLYPHS: Record<string, string> = {
  ball: "●", // ●
  cross: "✕", // ✕
  disc: "◉", // ◉
  king: "♚", // ♚
};

export function pieceGlyph(piece: SitePiece | null): string {
  if (!piece) return "";
  return GLYPHS[piece.piece] ?? piece.piece.slice(0, 1).toUpperCase();
}
