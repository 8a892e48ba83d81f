/**
 * Typed fetch client for the framefix review service.
 *
 * The UI is a pure client: every type here mirrors a service wire model
 * verbatim, frames stay opaque bracketed strings, and diff highlights come
 * pre-computed from the server. Nothing in the frontend parses frames.
 */

export type SortKey = "frequency" | "uncertainty" | "recency";

export interface ErrorBody {
  code: string;
  message: string;
  detail?: unknown;
}

export interface HistoryEntry {
  timestamp: string;
  status: string;
  actor: string;
}

export interface BugSummary {
  id: string;
  utterance: string;
  status: string;
  uncertainty: number;
  frequency: number;
  last_update: string;
  category: string | null;
  suggested_action: string | null;
  proposal_ids: string[];
  has_golden: boolean;
}

export interface BugPage {
  bugs: BugSummary[];
  total: number;
  offset: number;
  limit: number;
}

export interface BugDetail extends BugSummary {
  predicted_frame: string;
  golden_frame: string | null;
  history: HistoryEntry[];
}

export interface Finding {
  kind: string;
  slot_label: string | null;
  expected_span: [number, number] | null;
  predicted_span: [number, number] | null;
  expected_label: string | null;
  predicted_label: string | null;
}

export interface Segment {
  text: string;
  highlight: boolean;
}

export interface BugDiff {
  bug_id: string;
  verdict: string;
  tokens: string[];
  findings: Finding[];
  expected_serialized: string;
  predicted_serialized: string;
  expected_segments: Segment[];
  predicted_segments: Segment[];
  expected_token_spans: [number, number][];
  predicted_token_spans: [number, number][];
}

export interface TrainingExample {
  utterance: string;
  frame: string;
  weight: number;
}

export interface Proposal {
  id: string;
  source_bug_id: string;
  strategy: string;
  review_status: string;
  example_count: number;
  examples: TrainingExample[];
}

export interface ProposalPage {
  proposals: Proposal[];
  total: number;
}

export type ReviewAction = "accept" | "reject";

export interface ReviewResult {
  proposal: Proposal;
  bug_id: string;
  bug_status: string;
  training_size: number;
}

export interface RetrainResult {
  examples: number;
  exact_entries: number;
  patterns: number;
}

export interface RetrainStatus {
  state: "idle" | "running";
  last: RetrainResult | null;
}

export interface VerifyResult {
  verified: string[];
  recurred: string[];
  swept: number;
}

export interface Report {
  counts: Record<string, number>;
  total: number;
  fixes: number;
  recurrences: string[];
  window_start: string | null;
  window_end: string | null;
}

export interface HealthStatus {
  status: string;
  bugs: number;
}

export interface BugQuery {
  sort?: SortKey;
  status?: string;
  offset?: number;
  limit?: number;
}

export interface ReportWindow {
  window_start?: string;
  window_end?: string;
}

/** Error carrying the service's {code, message, detail} body and HTTP status. */
export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly detail: unknown;

  constructor(status: number, body: ErrorBody) {
    super(body.message);
    this.name = "ApiError";
    this.status = status;
    this.code = body.code;
    this.detail = body.detail;
  }
}

export class ApiClient {
  readonly baseUrl: string;
  private readonly fetchImpl: typeof fetch;

  constructor(baseUrl: string, fetchImpl?: typeof fetch) {
    this.baseUrl = baseUrl.replace(/\/+$/, "");
    this.fetchImpl = fetchImpl ?? globalThis.fetch;
  }

  private async request<T>(
    method: "GET" | "POST",
    path: string,
    query?: Record<string, string | number | undefined>,
    body?: unknown,
  ): Promise<T> {
    let url = this.baseUrl + path;
    if (query) {
      const params = new URLSearchParams();
      for (const [key, value] of Object.entries(query)) {
        if (value !== undefined) params.set(key, String(value));
      }
      const qs = params.toString();
      if (qs) url += "?" + qs;
    }
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetchImpl.call(globalThis, url, init);
    if (!response.ok) {
      let parsed: ErrorBody;
      try {
        parsed = (await response.json()) as ErrorBody;
      } catch {
        parsed = { code: "http_error", message: response.statusText };
      }
      throw new ApiError(response.status, parsed);
    }
    return (await response.json()) as T;
  }

  health(): Promise<HealthStatus> {
    return this.request("GET", "/health");
  }

  listBugs(query: BugQuery = {}): Promise<BugPage> {
    return this.request("GET", "/bugs", {
      sort: query.sort,
      status: query.status,
      offset: query.offset,
      limit: query.limit,
    });
  }

  getBug(id: string): Promise<BugDetail> {
    return this.request("GET", `/bugs/${encodeURIComponent(id)}`);
  }

  getDiff(id: string): Promise<BugDiff> {
    return this.request("GET", `/bugs/${encodeURIComponent(id)}/diff`);
  }

  listProposals(status?: string): Promise<ProposalPage> {
    return this.request("GET", "/proposals", { status });
  }

  review(id: string, action: ReviewAction): Promise<ReviewResult> {
    return this.request(
      "POST",
      `/proposals/${encodeURIComponent(id)}/review`,
      undefined,
      { action },
    );
  }

  retrain(): Promise<RetrainResult> {
    return this.request("POST", "/retrain");
  }

  retrainStatus(): Promise<RetrainStatus> {
    return this.request("GET", "/retrain/status");
  }

  verify(): Promise<VerifyResult> {
    return this.request("POST", "/verify");
  }

  report(window: ReportWindow = {}): Promise<Report> {
    return this.request("GET", "/report", {
      window_start: window.window_start,
      window_end: window.window_end,
    });
  }
}
