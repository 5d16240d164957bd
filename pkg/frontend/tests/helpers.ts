import type { AnswerPayload, CorpusSummary, Finding, Interpretation } from "../src/api.js";

export interface RecordedRequest {
  method: string;
  path: string;
  body: unknown;
}

export type RouteHandler = (body: unknown) => { status?: number; payload: unknown };

/**
 * Fetch stand-in driven by a route table. Keys look like
 * "POST /v1/sessions/[^/]+/query" (method, space, path regex). Every
 * request is recorded before dispatch so tests can inspect exact bodies.
 */
export function scriptedFetch(routes: Record<string, RouteHandler>) {
  const calls: RecordedRequest[] = [];
  const fetchFn = (async (input: RequestInfo | URL, init?: RequestInit) => {
    const url = new URL(String(input));
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    calls.push({ method, path: url.pathname, body });
    for (const [key, handler] of Object.entries(routes)) {
      const space = key.indexOf(" ");
      if (key.slice(0, space) !== method) continue;
      if (!new RegExp(`^${key.slice(space + 1)}$`).test(url.pathname)) continue;
      const { status = 200, payload } = handler(body);
      return new Response(JSON.stringify(payload), {
        status,
        headers: { "content-type": "application/json" },
      });
    }
    return new Response(
      JSON.stringify({ error_code: "UNKNOWN", message: `no route for ${method} ${url.pathname}` }),
      { status: 500, headers: { "content-type": "application/json" } },
    );
  }) as typeof fetch;
  return { fetchFn, calls };
}

export function interpretationFixture(overrides: Partial<Interpretation> = {}): Interpretation {
  return {
    query_text: "Does the password policy apply to device X?",
    policy: "password policy",
    standard: "Standard B",
    subject: null,
    source: "llm",
    status: "pending",
    ...overrides,
  };
}

export function corpusFixture(rows = 1): CorpusSummary {
  const documents = [];
  for (let i = 0; i < rows; i++) {
    documents.push({
      doc_id: `doc${i}`,
      title: i === 0 ? "Device Security Baseline" : `Standard Document ${i}`,
      standard_name: "Standard B",
      format: "plaintext",
      ingested_at: "2026-08-10T09:00:00+00:00",
    });
  }
  return { schema_version: 1, documents, chunk_count: rows * 12, standard_names: ["Standard B"] };
}

const EXCERPTS = [
  "Passwords for device X must be rotated every 90 days.",
  "Service account credentials are vaulted and rotated automatically.",
  "Shared credentials are forbidden on all network devices.",
];

const NO_FINDINGS_SENTENCE =
  "No relevant policy controls were found above the similarity threshold.";

/** Answer payload shaped exactly like the server's confirm response. */
export function answerFixture(findingCount: 0 | 1 | 2 | 3): AnswerPayload {
  const findings: Finding[] = [];
  for (let i = 0; i < findingCount; i++) {
    findings.push({
      chunk_id: `doc0#${4 + i}#0`,
      doc_id: "doc0",
      heading_path: ["5 Access Control", `5.${i + 1} Passwords`],
      excerpt: EXCERPTS[i],
      score: 0.62 - i * 0.1,
      control_id: `5.${i + 1}`,
    });
  }
  const slotLine =
    "**Interpreted query:** policy: password policy; standard: Standard B; subject: device X";
  const lines = [slotLine, ""];
  if (findingCount === 0) {
    lines.push(NO_FINDINGS_SENTENCE);
  } else {
    lines.push("**Relevant policy controls:**", "");
    findings.forEach((f, i) => lines.push(`- [${i + 1}] ${f.excerpt}`));
    lines.push("", "## References");
    findings.forEach((f, i) =>
      lines.push(`[${i + 1}] Device Security Baseline › ${f.heading_path.join(" › ")} (control ${f.control_id})`),
    );
  }
  return {
    query_text: "Does the password policy apply to device X?",
    markdown: lines.join("\n"),
    findings,
    tags: findingCount > 0 ? { "doc0#4#0": ["password-policy", "access-control"] } : {},
    created_at: "2026-08-10T09:05:00+00:00",
  };
}
