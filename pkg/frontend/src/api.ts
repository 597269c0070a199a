/**
 * Typed client for the railassist REST API. All responses pass through
 * unchanged: the UI layer renders payload fields, it never derives delay
 * numbers of its own.
 */

export interface JourneyStop {
  station: string;
  station_name: string;
  expected_late_min: number;
  interval_low: number;
  interval_high: number;
  source: "direct" | "shared" | "interpolated" | "fallback";
}

export interface ChatReply {
  session_id: string;
  reply_text: string;
  payload: Record<string, unknown>;
  needs_clarification: boolean;
}

export interface JourneyDocument {
  train: string;
  date: string;
  ci_level: number;
  model_kind: string;
  confidence: number;
  elapsed_prediction_ms: number;
  stops: JourneyStop[];
}

export interface SummaryStop {
  station: string;
  station_name: string;
  mean_late_min: number;
  n_observations: number;
}

export interface AnalyticsSummary {
  train_number: string;
  date_start: string;
  date_end: string;
  stops: SummaryStop[];
  destination: { station: string; average_late_min: number; pct_late_over_60: number };
  bottleneck: { station: string; increment_minutes: number };
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly detail?: unknown,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.base}${path}`, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const parsed = (await response.json()) as Record<string, unknown>;
    if (!response.ok) {
      throw new ApiError(
        response.status,
        typeof parsed.error === "string" ? parsed.error : "unknown",
        typeof parsed.message === "string" ? parsed.message : response.statusText,
        parsed.detail,
      );
    }
    return parsed as T;
  }

  chat(text: string, sessionId?: string | null): Promise<ChatReply> {
    const body: Record<string, unknown> = { text };
    if (sessionId) body.session_id = sessionId;
    return this.request<ChatReply>("POST", "/api/chat", body);
  }

  predict(train: string, date: string, station?: string): Promise<JourneyDocument> {
    const body: Record<string, unknown> = { train, date };
    if (station) body.station = station;
    return this.request<JourneyDocument>("POST", "/api/predict", body);
  }

  analyticsSummary(train: string): Promise<AnalyticsSummary> {
    return this.request<AnalyticsSummary>("GET", `/api/analytics/${encodeURIComponent(train)}/summary`);
  }
}
