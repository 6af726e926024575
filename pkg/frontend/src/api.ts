// Typed client for the causemine HTTP API. Every UI data need goes
// through this module; nothing in the app touches run files directly.

import type {
  BlocklistPage,
  CandidatePage,
  EvaluationReport,
  EvolveReport,
  FeedbackAck,
  FeedbackBody,
  ReviewStatus,
  RunSummary,
} from "./types.js";

export interface ClientConfig {
  baseUrl: string;
  token: string;
  // injectable for tests; defaults to the global fetch
  fetchImpl?: typeof fetch;
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: string) {
    super(`HTTP ${status}: ${detail}`);
    this.name = "ApiError";
  }
}

export interface CandidateQuery {
  status?: ReviewStatus;
  offset?: number;
  limit?: number;
}

interface ErrorBody {
  detail?: unknown;
}

export class ReviewApi {
  private readonly baseUrl: string;
  private readonly token: string;
  private readonly fetchImpl: typeof fetch;

  constructor(cfg: ClientConfig) {
    this.baseUrl = cfg.baseUrl.replace(/\/+$/, "");
    this.token = cfg.token;
    this.fetchImpl = cfg.fetchImpl ?? fetch;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const headers: Record<string, string> = {
      Authorization: `Bearer ${this.token}`,
    };
    const init: RequestInit = { method, headers };
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    // Network failures reject with TypeError and bubble to the caller;
    // the outbox keys its retry behavior off that distinction.
    const res = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const parsed = (await res.json()) as ErrorBody;
        if (typeof parsed.detail === "string") detail = parsed.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.request("GET", "/health");
  }

  listRuns(): Promise<RunSummary[]> {
    return this.request("GET", "/runs");
  }

  candidates(runId: string, query: CandidateQuery = {}): Promise<CandidatePage> {
    const params = new URLSearchParams();
    if (query.status !== undefined) params.set("status", query.status);
    if (query.offset !== undefined) params.set("offset", String(query.offset));
    if (query.limit !== undefined) params.set("limit", String(query.limit));
    const qs = params.toString();
    const path = `/runs/${encodeURIComponent(runId)}/candidates${qs ? `?${qs}` : ""}`;
    return this.request("GET", path);
  }

  submitFeedback(runId: string, body: FeedbackBody): Promise<FeedbackAck> {
    return this.request("POST", `/runs/${encodeURIComponent(runId)}/feedback`, body);
  }

  evolve(runId: string): Promise<EvolveReport> {
    return this.request("POST", `/runs/${encodeURIComponent(runId)}/evolve`);
  }

  metrics(runId: string): Promise<EvaluationReport> {
    return this.request("GET", `/runs/${encodeURIComponent(runId)}/metrics`);
  }

  blocklist(runId: string): Promise<BlocklistPage> {
    return this.request("GET", `/runs/${encodeURIComponent(runId)}/blocklist`);
  }
}
