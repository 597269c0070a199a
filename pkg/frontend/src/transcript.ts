/**
 * Chat session state: transcript, session id persistence, retry handling.
 * One request may be in flight at a time; the UI disables input while
 * waiting. The whole state round-trips through a key-value store so a page
 * reload restores both the session id and the visible transcript.
 */

import { ApiClient, ApiError, type ChatReply } from "./api.js";

export interface KeyValueStore {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
}

export type ChatMessage =
  | { role: "user"; text: string; failed?: boolean }
  | { role: "bot"; text: string; payload: Record<string, unknown> };

export interface TranscriptState {
  sessionId: string | null;
  messages: ChatMessage[];
  inFlight: boolean;
}

const STORAGE_KEY = "railassist.chat";

export class ChatSession {
  state: TranscriptState = { sessionId: null, messages: [], inFlight: false };

  constructor(
    private readonly client: ApiClient,
    private readonly store: KeyValueStore,
    private readonly onChange: (state: TranscriptState) => void = () => {},
  ) {}

  restore(): void {
    const raw = this.store.getItem(STORAGE_KEY);
    if (!raw) return;
    try {
      const saved = JSON.parse(raw) as { sessionId: string | null; messages: ChatMessage[] };
      this.state = { sessionId: saved.sessionId, messages: saved.messages, inFlight: false };
    } catch {
      // Malformed cache: start a fresh session rather than crash.
      this.state = { sessionId: null, messages: [], inFlight: false };
    }
    this.onChange(this.state);
  }

  private persist(): void {
    this.store.setItem(
      STORAGE_KEY,
      JSON.stringify({ sessionId: this.state.sessionId, messages: this.state.messages }),
    );
  }

  private emit(): void {
    this.persist();
    this.onChange(this.state);
  }

  /** Send one user turn; no-ops while another request is in flight. */
  async send(text: string): Promise<ChatReply | null> {
    if (this.state.inFlight || !text.trim()) return null;
    this.state.inFlight = true;
    this.state.messages.push({ role: "user", text });
    this.onChange(this.state);
    try {
      const reply = await this.client.chat(text, this.state.sessionId);
      this.state.sessionId = reply.session_id;
      this.state.messages.push({ role: "bot", text: reply.reply_text, payload: reply.payload });
      return reply;
    } catch (err) {
      if (err instanceof ApiError) {
        // Service-level refusals and errors arrive as bot speech bubbles.
        this.state.messages.push({ role: "bot", text: err.message, payload: { kind: err.code } });
        return null;
      }
      // Network failure: mark the turn retryable.
      const last = this.state.messages[this.state.messages.length - 1];
      if (last && last.role === "user") last.failed = true;
      return null;
    } finally {
      this.state.inFlight = false;
      this.emit();
    }
  }

  /** Resend the most recent failed user turn. */
  async retryLast(): Promise<ChatReply | null> {
    const failed = [...this.state.messages].reverse().find((m) => m.role === "user" && m.failed);
    if (!failed || failed.role !== "user") return null;
    failed.failed = false;
    this.state.messages = this.state.messages.filter((m) => m !== failed);
    return this.send(failed.text);
  }

  /** A station chip click becomes the documented follow-up turn. */
  async sendStationFollowUp(stationName: string): Promise<ChatReply | null> {
    return this.send(`How about for ${stationName}?`);
  }
}
