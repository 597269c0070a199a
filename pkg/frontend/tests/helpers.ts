import { readFileSync } from "node:fs";

import { ApiClient } from "../src/api.js";
import type { KeyValueStore } from "../src/transcript.js";

export interface RecordedExchange {
  request: { method: string; path: string; body: unknown };
  status: number;
  body: Record<string, unknown>;
}

export function loadFixture<T = RecordedExchange>(name: string): T {
  const url = new URL(`./fixtures/${name}.json`, import.meta.url);
  return JSON.parse(readFileSync(url, "utf-8")) as T;
}

export class FakeStore implements KeyValueStore {
  private data = new Map<string, string>();

  getItem(key: string): string | null {
    return this.data.has(key) ? (this.data.get(key) as string) : null;
  }

  setItem(key: string, value: string): void {
    this.data.set(key, value);
  }
}

export interface SentRequest {
  path: string;
  init?: RequestInit;
  body: unknown;
}

/** ApiClient whose fetch replays recorded exchanges in order. */
export function replayClient(exchanges: RecordedExchange[]): { client: ApiClient; sent: SentRequest[] } {
  const sent: SentRequest[] = [];
  let cursor = 0;
  const fetchFn = async (path: string, init?: RequestInit) => {
    const exchange = exchanges[cursor];
    if (!exchange) throw new Error(`no recorded exchange for request ${cursor} (${path})`);
    cursor += 1;
    sent.push({ path, init, body: init?.body ? JSON.parse(String(init.body)) : undefined });
    return new Response(JSON.stringify(exchange.body), {
      status: exchange.status,
      headers: { "Content-Type": "application/json" },
    });
  };
  return { client: new ApiClient("", fetchFn), sent };
}

export function failingClient(): ApiClient {
  return new ApiClient("", async () => {
    throw new TypeError("network down");
  });
}
