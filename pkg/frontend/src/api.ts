// HTTP client for the measurement service.
//
// Mutations are serialized per session (at most one in flight, queued in
// order) and every mutation result carries a sequence number so consumers
// can discard stale state: apply a response only when its seq is newer
// than the last one applied for that point.

import type {
  PickDoc,
  PointStateDoc,
  ProjectDoc,
  SessionDoc,
  SessionSummaryDoc,
} from "./types.js";

export class ApiError extends Error {
  readonly code: string;
  readonly status: number;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.code = code;
    this.status = status;
  }
}

export interface Sequenced<T> {
  seq: number;
  state: T;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function parseError(response: Response): Promise<ApiError> {
  let code = "http_error";
  let message = `HTTP ${response.status}`;
  try {
    const body = await response.json();
    if (body && typeof body.code === "string") {
      code = body.code;
      message = body.message ?? message;
    }
  } catch {
    // non-JSON error body; keep the generic message
  }
  return new ApiError(response.status, code, message);
}

export class ApiClient {
  private readonly base: string;
  private readonly fetchImpl: FetchLike;
  private seqCounter = 0;
  private queues = new Map<string, Promise<unknown>>();

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.base = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.base + path, init);
    if (!response.ok) {
      // Degenerate geometry responds 422 but still carries the point
      // state; surface it as a normal state payload.
      if (response.status === 422) {
        const body = await response.clone().json().catch(() => null);
        if (body && body.status === "degenerate") {
          return body as T;
        }
      }
      throw await parseError(response);
    }
    return (await response.json()) as T;
  }

  private post<T>(path: string, body: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  /** Chain a mutation onto the session's queue; one in flight at a time. */
  private mutate<T>(sessionId: string, run: () => Promise<T>): Promise<Sequenced<T>> {
    const seq = ++this.seqCounter;
    const tail = this.queues.get(sessionId) ?? Promise.resolve();
    const next = tail.then(run, run);
    this.queues.set(sessionId, next.catch(() => undefined));
    return next.then((state) => ({ seq, state }));
  }

  // -- projects -----------------------------------------------------------

  listProjects(): Promise<ProjectDoc[]> {
    return this.request("/api/projects");
  }

  getProject(projectId: string): Promise<ProjectDoc> {
    return this.request(`/api/projects/${encodeURIComponent(projectId)}`);
  }

  imageUrl(projectId: string, imageId: string): string {
    return `${this.base}/api/projects/${encodeURIComponent(projectId)}/images/${encodeURIComponent(imageId)}`;
  }

  // -- sessions -----------------------------------------------------------

  listSessions(): Promise<SessionSummaryDoc[]> {
    return this.request("/api/sessions");
  }

  createSession(projectId: string, sessionId?: string): Promise<SessionDoc> {
    const body: Record<string, string> = { project_id: projectId };
    if (sessionId) body.id = sessionId;
    return this.post("/api/sessions", body);
  }

  getSession(sessionId: string): Promise<SessionDoc> {
    return this.request(`/api/sessions/${encodeURIComponent(sessionId)}`);
  }

  exportUrl(sessionId: string, format: "csv" | "json"): string {
    return `${this.base}/api/sessions/${encodeURIComponent(sessionId)}/export?format=${format}`;
  }

  async exportText(sessionId: string, format: "csv" | "json"): Promise<string> {
    const response = await this.fetchImpl(this.exportUrl(sessionId, format));
    if (!response.ok) throw await parseError(response);
    return response.text();
  }

  // -- points and picks (mutations, queued per session) --------------------

  createPoint(
    sessionId: string,
    options: { label: string; mode?: string; id?: string },
  ): Promise<Sequenced<PointStateDoc>> {
    return this.mutate(sessionId, () =>
      this.post<PointStateDoc>(
        `/api/sessions/${encodeURIComponent(sessionId)}/points`,
        options,
      ),
    );
  }

  renamePoint(
    sessionId: string,
    pointId: string,
    label: string,
  ): Promise<Sequenced<PointStateDoc>> {
    return this.mutate(sessionId, () =>
      this.request<PointStateDoc>(
        `/api/sessions/${encodeURIComponent(sessionId)}/points/${encodeURIComponent(pointId)}`,
        {
          method: "PATCH",
          headers: { "content-type": "application/json" },
          body: JSON.stringify({ label }),
        },
      ),
    );
  }

  addPick(
    sessionId: string,
    pointId: string,
    pick: PickDoc,
  ): Promise<Sequenced<PointStateDoc>> {
    return this.mutate(sessionId, () =>
      this.post<PointStateDoc>(
        `/api/sessions/${encodeURIComponent(sessionId)}/points/${encodeURIComponent(pointId)}/picks`,
        pick,
      ),
    );
  }

  deletePick(
    sessionId: string,
    pointId: string,
    index: number,
  ): Promise<Sequenced<PointStateDoc>> {
    return this.mutate(sessionId, () =>
      this.request<PointStateDoc>(
        `/api/sessions/${encodeURIComponent(sessionId)}/points/${encodeURIComponent(pointId)}/picks/${index}`,
        { method: "DELETE" },
      ),
    );
  }
}
