// Metrics panel model: label and format the report exactly as served.

import type { MetricsReport } from "./types.js";

export interface MetricRow {
  label: string;
  value: string;
}

export function formatMetric(value: number | null | undefined, digits = 4): string {
  if (value === null || value === undefined) return "absent";
  return value.toFixed(digits);
}

/** Panel rows; the six play-quality indicator names are labeled verbatim. */
export function metricsRows(report: MetricsReport): MetricRow[] {
  return [
    { label: "Games", value: String(report.games) },
    { label: "Balance (A-B)", value: formatMetric(report.balance) },
    { label: "Balance CI", value: formatMetric(report.balanceCI) },
    { label: "Side balance (P1-P2)", value: formatMetric(report.sideBalance) },
    { label: "Drawishness", value: formatMetric(report.drawishness) },
    { label: "Completion rate", value: formatMetric(report.completionRate) },
    { label: "Duration", value: `${formatMetric(report.durationMean, 2)} ± ${formatMetric(report.durationStd, 2)}` },
    { label: "Decisiveness", value: formatMetric(report.decisiveness) },
    { label: "Uncertainty", value: formatMetric(report.uncertainty) },
    { label: "Drama", value: formatMetric(report.drama) },
    { label: "Strategic depth", value: formatMetric(report.strategicDepth) },
    { label: "Complexity", value: String(report.complexity) },
    { label: "Flags", value: report.flags.length ? report.flags.join(", ") : "-" },
  ];
}

export function defaultAnalysisJob(ludText: string): Record<string, unknown> {
  return {
    metricsVersion: 1,
    ludText,
    games: 200,
    masterSeed: 0,
    moveCap: 300,
    agents: { a: { kind: "random" }, b: { kind: "random" } },
    depthProbe: { lowBudget: 50, highBudget: 400, games: 12 },
  };
}
