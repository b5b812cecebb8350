/** Canonical display formatting for server-reported numbers.
 *
 * Every cost and classification string shown in the UI goes through these
 * helpers, and the scripted-session test re-derives the same strings from the
 * history endpoint, so a formatting drift between views is a test failure.
 * Nothing here computes: inputs are server values, outputs are strings. */

import type { CostBreakdownJson, ReuseClass, TraceStepJson } from "./types.js";

const CLASS_TAGS: Record<ReuseClass, string> = {
  tweak: "TWEAK ($)",
  swap: "SWAP ($$)",
  create: "CREATE ($$$)",
};

export function formatNumber(v: number): string {
  // emit a stable, locale-independent decimal form (up to 6 significant bits
  // of noise trimmed, integers stay integers)
  if (Number.isInteger(v)) return String(v);
  return String(Math.round(v * 1e6) / 1e6);
}

export function classBadge(group: string, cls: ReuseClass): string {
  return `${group}: ${CLASS_TAGS[cls]}`;
}

export function formatBreakdown(bd: CostBreakdownJson, unit: string): string {
  const parts = Object.keys(bd.per_group_class)
    .sort()
    .map(
      (g) =>
        `${classBadge(g, bd.per_group_class[g])} = ${formatNumber(bd.per_group_cost[g])}`,
    );
  return `${parts.join(" | ")} | total ${formatNumber(bd.total)} ${unit}`;
}

export function formatConfiguration(values: Record<string, number>): string {
  return Object.keys(values)
    .sort()
    .map((k) => `${k}=${formatNumber(values[k])}`)
    .join(", ");
}

/** The one-line trace row the UI table shows for a completed step. */
export function formatTraceRow(step: TraceStepJson, unit: string): string {
  return [
    `#${step.iteration}`,
    formatConfiguration(step.realized),
    formatBreakdown(step.believed_cost, unit),
    `paid ${formatNumber(step.true_cost_paid)}`,
    `cum ${formatNumber(step.cumulative_true_cost)}`,
    `utility ${formatNumber(step.utility)}`,
    `best ${formatNumber(step.best_so_far)}`,
  ].join(" · ");
}
