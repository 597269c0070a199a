/**
 * Browser bootstrap: wires the chat session and analytics panel to the DOM.
 * Kept thin; everything interesting lives in the testable modules.
 */

import { ApiClient } from "./api.js";
import { escapeHtml } from "./format.js";
import { loadAnalyticsPanel } from "./analytics.js";
import { ChatSession, type TranscriptState } from "./transcript.js";
import { followUpText, renderBotWidgets } from "./widgets.js";

function renderTranscript(state: TranscriptState): string {
  return state.messages
    .map((message) => {
      if (message.role === "user") {
        const retry = message.failed
          ? `<button class="retry" type="button">Retry</button>`
          : "";
        return `<div class="bubble user${message.failed ? " failed" : ""}">${escapeHtml(message.text)}${retry}</div>`;
      }
      return `<div class="bubble bot">${escapeHtml(message.text)}${renderBotWidgets(message.payload)}</div>`;
    })
    .join("");
}

export function mountApp(root: Document = document): void {
  const log = root.getElementById("chat-log") as HTMLElement;
  const form = root.getElementById("chat-form") as HTMLFormElement;
  const input = root.getElementById("chat-input") as HTMLInputElement;
  const sendButton = root.getElementById("chat-send") as HTMLButtonElement;
  const analyticsForm = root.getElementById("analytics-form") as HTMLFormElement;
  const analyticsInput = root.getElementById("analytics-train") as HTMLInputElement;
  const analyticsPanel = root.getElementById("analytics-panel") as HTMLElement;

  const client = new ApiClient("");
  const session = new ChatSession(client, window.localStorage, (state) => {
    log.innerHTML = renderTranscript(state);
    input.disabled = state.inFlight;
    sendButton.disabled = state.inFlight;
    log.scrollTop = log.scrollHeight;
  });
  session.restore();

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const text = input.value;
    input.value = "";
    void session.send(text);
  });

  log.addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    if (target.classList.contains("chip")) {
      const name = target.dataset.stationName;
      if (name) {
        input.value = followUpText(name);
        void session.sendStationFollowUp(name);
        input.value = "";
      }
    }
    if (target.classList.contains("retry")) {
      void session.retryLast();
    }
  });

  analyticsForm.addEventListener("submit", (event) => {
    event.preventDefault();
    void loadAnalyticsPanel(client, analyticsInput.value.trim()).then((view) => {
      analyticsPanel.innerHTML = view.html;
    });
  });
}

if (typeof document !== "undefined" && document.getElementById("chat-form")) {
  mountApp();
}
