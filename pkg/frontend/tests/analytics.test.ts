import { describe, expect, it } from "vitest";

import { loadAnalyticsPanel } from "../src/analytics.js";
import { loadFixture, replayClient } from "./helpers.js";

const SUMMARY = loadFixture("summary_12307");
const UNKNOWN = loadFixture("summary_unknown");

describe("analytics panel", () => {
  it("renders the delay profile for a known train", async () => {
    const { client } = replayClient([SUMMARY]);
    const view = await loadAnalyticsPanel(client, "12307");
    expect(view.kind).toBe("ready");
    expect(view.html).toContain('data-train="12307"');
    expect(view.html).toContain("sparkline");
    expect(view.html).toContain("destination-stats");
  });

  it("shows a friendly not-found state for an unknown train", async () => {
    const { client } = replayClient([UNKNOWN]);
    const view = await loadAnalyticsPanel(client, "99999");
    expect(view.kind).toBe("not-found");
    expect(view.html).toContain("No train 99999");
  });
});
