/**
 * Typed client for the activesearch review service.
 *
 * The UI keeps no algorithm state of its own: every screen renders a
 * Snapshot exactly as the service returned it.
 */

export interface PendingDoc {
  id: string;
  text: string;
  pi: number;
}

export interface Arm {
  cluster: number;
  s: number;
  f: number;
}

export type SessionStatus = "awaiting_labels" | "computing" | "finished";

export interface Snapshot {
  session_id: string;
  status: SessionStatus;
  reviewed: number;
  relevant_found: number;
  batch_size: number;
  round: number;
  budget_count: number;
  collection_size: number;
  arms: Arm[];
  found_curve: [number, number][];
  pending: PendingDoc[];
}

export interface CorpusInfo {
  name: string;
  documents: number;
  clusters: number;
}

export interface CreateSessionRequest {
  corpus: string;
  config?: Record<string, unknown>;
  seed_ids?: string[];
  seed_query?: string;
}

export type Labels = Record<string, 0 | 1>;

/** Service-reported failure; `retryable` marks transient conditions. */
export class ServiceError extends Error {
  constructor(
    readonly code: string,
    readonly detail: string,
    readonly status: number,
    readonly retryable: boolean,
  ) {
    super(`${code}: ${detail}`);
  }
}

async function request<T>(path: string, init?: RequestInit): Promise<T> {
  let response: Response;
  try {
    response = await fetch(path, init);
  } catch (err) {
    throw new ServiceError("Unreachable", String(err), 0, true);
  }
  let body: unknown = null;
  try {
    body = await response.json();
  } catch {
    // non-JSON error body; fall through with nulls
  }
  if (!response.ok) {
    const rec = (body ?? {}) as Record<string, unknown>;
    const code = typeof rec.error === "string" ? rec.error : `HTTP ${response.status}`;
    const detail = typeof rec.detail === "string" ? rec.detail : response.statusText;
    const retryable = rec.retry === true || response.status >= 500;
    throw new ServiceError(code, detail, response.status, retryable);
  }
  return body as T;
}

/** What the app needs from the service; tests substitute a scripted fake. */
export interface ReviewApi {
  listCorpora(): Promise<{ corpora: CorpusInfo[] }>;
  createSession(req: CreateSessionRequest): Promise<Snapshot>;
  getSession(sessionId: string): Promise<Snapshot>;
  submitLabels(sessionId: string, labels: Labels): Promise<Snapshot>;
  trajectoryUrl(sessionId: string): string;
}

export class Api implements ReviewApi {
  constructor(private readonly base: string = "") {}

  listCorpora(): Promise<{ corpora: CorpusInfo[] }> {
    return request(`${this.base}/corpora`);
  }

  createSession(req: CreateSessionRequest): Promise<Snapshot> {
    return request(`${this.base}/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(req),
    });
  }

  getSession(sessionId: string): Promise<Snapshot> {
    return request(`${this.base}/sessions/${sessionId}`);
  }

  /** Submit exactly the pending map; the service advance is exactly-once. */
  submitLabels(sessionId: string, labels: Labels): Promise<Snapshot> {
    return request(`${this.base}/sessions/${sessionId}/labels`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ labels }),
    });
  }

  trajectoryUrl(sessionId: string): string {
    return `${this.base}/sessions/${sessionId}/trajectory`;
  }
}
