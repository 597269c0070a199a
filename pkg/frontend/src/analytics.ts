/** Route analytics panel: per-stop sparkline plus destination stats. */

import { ApiClient, ApiError, type AnalyticsSummary } from "./api.js";
import { escapeHtml } from "./format.js";
import { renderDestinationStats, renderSparkline } from "./widgets.js";

export type AnalyticsView =
  | { kind: "ready"; summary: AnalyticsSummary; html: string }
  | { kind: "not-found"; train: string; html: string }
  | { kind: "error"; message: string; html: string };

export function renderAnalyticsPanel(summary: AnalyticsSummary): string {
  return (
    `<section class="analytics" data-train="${escapeHtml(summary.train_number)}">` +
    `<h3>Train ${escapeHtml(summary.train_number)} delay profile</h3>` +
    `<p class="range">${escapeHtml(summary.date_start)} to ${escapeHtml(summary.date_end)}</p>` +
    renderSparkline(summary.stops) +
    renderDestinationStats(summary) +
    `</section>`
  );
}

export function renderNotFound(train: string): string {
  return (
    `<section class="analytics not-found">` +
    `<p>No train ${escapeHtml(train)} in the catalog. Check the number and try again.</p>` +
    `</section>`
  );
}

export async function loadAnalyticsPanel(client: ApiClient, train: string): Promise<AnalyticsView> {
  try {
    const summary = await client.analyticsSummary(train);
    return { kind: "ready", summary, html: renderAnalyticsPanel(summary) };
  } catch (err) {
    if (err instanceof ApiError && err.status === 404) {
      return { kind: "not-found", train, html: renderNotFound(train) };
    }
    const message = err instanceof Error ? err.message : String(err);
    return { kind: "error", message, html: `<section class="analytics error"><p>${escapeHtml(message)}</p></section>` };
  }
}
