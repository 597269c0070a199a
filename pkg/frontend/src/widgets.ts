/**
 * Structured-payload widgets rendered as HTML strings so they are testable
 * without a DOM. Every number shown here is read from the payload; the bar
 * and sparkline geometry is layout only.
 */

import type { JourneyStop, SummaryStop } from "./api.js";
import { escapeHtml, formatMinutes, formatPercent } from "./format.js";

export interface StationChip {
  station: string;
  station_name: string;
}

function journeyBounds(stops: JourneyStop[]): { lo: number; hi: number } {
  let lo = Infinity;
  let hi = -Infinity;
  for (const stop of stops) {
    lo = Math.min(lo, stop.interval_low);
    hi = Math.max(hi, stop.interval_high);
  }
  if (!(hi > lo)) {
    hi = lo + 1;
  }
  return { lo, hi };
}

export function renderJourneyTable(stops: JourneyStop[]): string {
  const { lo, hi } = journeyBounds(stops);
  const span = hi - lo;
  const pct = (v: number) => ((v - lo) / span) * 100;
  const rows = stops
    .map((stop) => {
      const left = pct(stop.interval_low);
      const width = Math.max(pct(stop.interval_high) - left, 0.5);
      const dot = pct(stop.expected_late_min);
      return (
        `<tr data-station="${escapeHtml(stop.station)}" data-source="${stop.source}">` +
        `<td class="station">${escapeHtml(stop.station_name)} <span class="code">${escapeHtml(stop.station)}</span></td>` +
        `<td class="minutes" data-field="expected_late_min">${formatMinutes(stop.expected_late_min)}</td>` +
        `<td class="interval" data-field="interval" title="${formatMinutes(stop.interval_low)} to ${formatMinutes(stop.interval_high)}">` +
        `<div class="bar-track">` +
        `<div class="bar" style="left:${left.toFixed(2)}%;width:${width.toFixed(2)}%"></div>` +
        `<div class="dot" style="left:${dot.toFixed(2)}%"></div>` +
        `</div></td>` +
        `<td class="source">${stop.source}</td></tr>`
      );
    })
    .join("");
  return (
    `<table class="journey"><thead><tr>` +
    `<th>Station</th><th>Expected late (min)</th><th>Interval</th><th>Source</th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function followUpText(stationName: string): string {
  return `How about for ${stationName}?`;
}

export function renderStationChips(stations: StationChip[]): string {
  const chips = stations
    .map(
      (s) =>
        `<button class="chip" data-station="${escapeHtml(s.station)}" ` +
        `data-station-name="${escapeHtml(s.station_name)}">${escapeHtml(s.station_name)}</button>`,
    )
    .join("");
  return `<div class="chips">${chips}</div>`;
}

export function renderSparkline(stops: SummaryStop[], width = 240, height = 48): string {
  const values = stops.map((s) => s.mean_late_min);
  const lo = Math.min(...values, 0);
  const hi = Math.max(...values, 1);
  const step = stops.length > 1 ? width / (stops.length - 1) : 0;
  const y = (v: number) => height - ((v - lo) / (hi - lo)) * (height - 4) - 2;
  const points = values.map((v, i) => `${(i * step).toFixed(1)},${y(v).toFixed(1)}`).join(" ");
  const markers = stops
    .map(
      (s, i) =>
        `<circle cx="${(i * step).toFixed(1)}" cy="${y(s.mean_late_min).toFixed(1)}" r="2" ` +
        `data-station="${escapeHtml(s.station)}" data-mean="${formatMinutes(s.mean_late_min)}"><title>` +
        `${escapeHtml(s.station_name)}: ${formatMinutes(s.mean_late_min)} min</title></circle>`,
    )
    .join("");
  return (
    `<svg class="sparkline" viewBox="0 0 ${width} ${height}" role="img">` +
    `<polyline fill="none" points="${points}"></polyline>${markers}</svg>`
  );
}

export function renderDestinationStats(summary: {
  destination: { station: string; average_late_min: number; pct_late_over_60: number };
  bottleneck: { station: string; increment_minutes: number };
}): string {
  const d = summary.destination;
  const b = summary.bottleneck;
  return (
    `<dl class="destination-stats">` +
    `<dt>Average delay at ${escapeHtml(d.station)}</dt>` +
    `<dd data-field="average_late_min">${formatMinutes(d.average_late_min)} min</dd>` +
    `<dt>Late over an hour</dt>` +
    `<dd data-field="pct_late_over_60">${formatPercent(d.pct_late_over_60)}</dd>` +
    `<dt>Bottleneck</dt>` +
    `<dd data-field="bottleneck">${escapeHtml(b.station)} (+${formatMinutes(b.increment_minutes)} min)</dd>` +
    `</dl>`
  );
}

/** Widget block for one bot reply, chosen by the machine payload's kind. */
export function renderBotWidgets(payload: Record<string, unknown>): string {
  const kind = payload.kind;
  if (kind === "station_list_offer" && Array.isArray(payload.stations)) {
    return renderStationChips(payload.stations as StationChip[]);
  }
  const journey = payload.journey;
  if (Array.isArray(journey) && journey.length > 0) {
    return renderJourneyTable(journey as JourneyStop[]);
  }
  return "";
}
