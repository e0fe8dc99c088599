/** Thin typed client over the service API with job polling. */

import type {
  AttentionPayload,
  DatasetInfo,
  EditOp,
  EditResponse,
  EmbeddingPayload,
  Explanation,
  GraphPayload,
  JobPayload,
  ModelInfo,
  NodeInfo,
  SessionHandle,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public readonly code: string,
    message: string,
    public readonly status: number,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function request<T>(
  path: string,
  init?: RequestInit,
): Promise<T> {
  const res = await fetch(path, {
    headers: { "content-type": "application/json" },
    ...init,
  });
  const body = await res.json();
  if (!res.ok) {
    const err = (body as { error?: { code: string; message: string } }).error;
    throw new ApiError(
      err?.code ?? "unknown",
      err?.message ?? `HTTP ${res.status}`,
      res.status,
    );
  }
  return body as T;
}

const sleep = (ms: number) => new Promise((r) => setTimeout(r, ms));

export class ApiClient {
  constructor(
    private readonly base = "",
    private readonly pollIntervalMs = 250,
  ) {}

  private get<T>(path: string): Promise<T> {
    return request<T>(this.base + path);
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return request<T>(this.base + path, {
      method: "POST",
      body: JSON.stringify(payload),
    });
  }

  listDatasets(): Promise<{ datasets: DatasetInfo[] }> {
    return this.get("/datasets");
  }

  listModels(): Promise<{ models: ModelInfo[] }> {
    return this.get("/models");
  }

  createSession(dataset: string, model: string): Promise<SessionHandle> {
    return this.post("/sessions", { dataset, model });
  }

  getGraph(sid: string): Promise<GraphPayload> {
    return this.get(`/sessions/${sid}/graph`);
  }

  getNode(sid: string, node: number): Promise<NodeInfo> {
    return this.get(`/sessions/${sid}/nodes/${node}`);
  }

  postEdit(sid: string, op: EditOp): Promise<EditResponse> {
    return this.post(`/sessions/${sid}/edits`, op);
  }

  reset(sid: string): Promise<{ graph_version: number }> {
    return request(`${this.base}/sessions/${sid}/reset`, { method: "POST" });
  }

  getAttention(sid: string, node: number): Promise<AttentionPayload> {
    return this.get(`/sessions/${sid}/attention/${node}`);
  }

  getJob(jobId: string): Promise<JobPayload> {
    return this.get(`/jobs/${jobId}`);
  }

  /** Poll a job until it leaves the queue. Resolves with the result of a
   * `done` job and rejects for `failed`/`cancelled`. */
  async pollJob<T>(
    jobId: string,
    onProgress?: (fraction: number) => void,
  ): Promise<T> {
    for (;;) {
      const job = await this.getJob(jobId);
      onProgress?.(job.progress);
      if (job.state === "done") return job.result as T;
      if (job.state === "failed") {
        throw new ApiError(
          job.error?.code ?? "job-failed",
          job.error?.message ?? "job failed",
          500,
        );
      }
      if (job.state === "cancelled") {
        throw new ApiError("cancelled", "job cancelled", 409);
      }
      await sleep(this.pollIntervalMs);
    }
  }

  /** Request an explanation; transparently waits on the job when the
   * response is not already cached. */
  async explain(
    sid: string,
    node: number,
    config?: Record<string, number>,
    onProgress?: (fraction: number) => void,
  ): Promise<Explanation> {
    const res = await this.post<Explanation | { job: JobPayload }>(
      `/sessions/${sid}/explain`,
      { node, config: config ?? {} },
    );
    if ("job" in res) return this.pollJob<Explanation>(res.job.id, onProgress);
    return res;
  }

  async embeddings(
    sid: string,
    method: "pca" | "tsne",
    onProgress?: (fraction: number) => void,
  ): Promise<EmbeddingPayload> {
    const res = await this.get<EmbeddingPayload | { job: JobPayload }>(
      `/sessions/${sid}/embeddings?method=${method}`,
    );
    if ("job" in res) {
      return this.pollJob<EmbeddingPayload>(res.job.id, onProgress);
    }
    return res;
  }
}
