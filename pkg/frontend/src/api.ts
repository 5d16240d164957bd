/**
 * Typed client for the auditnet /v1 HTTP API.
 *
 * Every method performs exactly one request and resolves with the parsed
 * JSON body. Non-2xx responses reject with an ApiError carrying the
 * server's error_code, so callers can branch on WRONG_STATE vs
 * PROVIDER_UNREACHABLE without string-matching messages.
 */

export interface Interpretation {
  query_text: string;
  policy: string | null;
  standard: string | null;
  subject: string | null;
  source: string;
  status: string;
}

export interface Finding {
  chunk_id: string;
  doc_id: string;
  heading_path: string[];
  excerpt: string;
  score: number;
  control_id: string | null;
}

export interface AnswerPayload {
  query_text: string;
  markdown: string;
  findings: Finding[];
  tags: Record<string, string[]>;
  created_at: string;
}

export interface QueryResponse {
  session_id: string;
  state: string;
  interpretation: Interpretation;
}

export interface ConfirmResponse extends QueryResponse {
  answer: AnswerPayload;
}

export interface DocumentRow {
  doc_id: string;
  title: string;
  standard_name: string;
  format: string;
  ingested_at: string;
}

export interface CorpusSummary {
  schema_version: number;
  documents: DocumentRow[];
  chunk_count: number;
  standard_names: string[];
}

/** Only the slots the user actually changed; null clears a slot. */
export interface SlotEdits {
  policy?: string | null;
  standard?: string | null;
  subject?: string | null;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly errorCode: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export interface ApiClientOptions {
  baseUrl?: string;
  fetchFn?: typeof fetch;
}

const DEFAULT_BASE_URL = "http://127.0.0.1:8321";

export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: typeof fetch;

  constructor(options: ApiClientOptions = {}) {
    this.baseUrl = (options.baseUrl ?? DEFAULT_BASE_URL).replace(/\/+$/, "");
    this.fetchFn = options.fetchFn ?? fetch.bind(globalThis);
  }

  health(): Promise<{ status: string; documents: number; chunks: number }> {
    return this.request("GET", "/v1/health");
  }

  listDocuments(): Promise<CorpusSummary> {
    return this.request("GET", "/v1/documents");
  }

  createSession(): Promise<{ session_id: string; state: string }> {
    return this.request("POST", "/v1/sessions");
  }

  submitQuery(sessionId: string, text: string): Promise<QueryResponse> {
    return this.request("POST", `/v1/sessions/${sessionId}/query`, { text });
  }

  confirm(sessionId: string, edits: SlotEdits): Promise<ConfirmResponse> {
    return this.request("POST", `/v1/sessions/${sessionId}/confirm`, edits);
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const init: RequestInit = { method, headers: {} };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    let response: Response;
    try {
      response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ApiError(0, "NETWORK", err instanceof Error ? err.message : String(err));
    }
    if (!response.ok) {
      const detail = await response
        .json()
        .catch(() => ({ error_code: "UNKNOWN", message: response.statusText }));
      throw new ApiError(
        response.status,
        typeof detail.error_code === "string" ? detail.error_code : "UNKNOWN",
        typeof detail.message === "string" ? detail.message : response.statusText,
      );
    }
    return (await response.json()) as T;
  }
}
