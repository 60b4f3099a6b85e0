// Thin typed client over the service's JSON contract. Every view talks to
// the backend through this module and nothing else.

import type {
  CorrelationsPayload,
  ExternalPayload,
  FeatureLists,
  FeatureUpdate,
  GroupMapUpdate,
  JobPayload,
  PostDetail,
  RetrainAccepted,
  SamplesPayload,
  SnapshotInfo,
  TopicsPayload,
  TrendsPayload,
  TrendSource,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private readonly fetchImpl: FetchLike;

  constructor(
    fetchImpl?: FetchLike,
    private readonly base: string = "",
  ) {
    // bind so a bare window.fetch keeps its receiver
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await this.fetchImpl(this.base + path, init);
    } catch (err) {
      throw new ApiError(0, `service unreachable: ${String(err)}`);
    }
    const text = await response.text();
    let body: unknown = null;
    if (text.length > 0) {
      try {
        body = JSON.parse(text);
      } catch {
        body = null;
      }
    }
    if (!response.ok) {
      const fromBody =
        body !== null && typeof body === "object" && "error" in body
          ? String((body as { error: unknown }).error)
          : `${response.status} ${response.statusText}`;
      throw new ApiError(response.status, fromBody);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  snapshot(): Promise<SnapshotInfo> {
    return this.request("/api/snapshot");
  }

  topics(): Promise<TopicsPayload> {
    return this.request("/api/topics");
  }

  samples(topic: number, seed: number): Promise<SamplesPayload> {
    return this.request(`/api/topics/${topic}/samples?seed=${seed}`);
  }

  postDetail(postId: string): Promise<PostDetail> {
    return this.request(`/api/posts/${encodeURIComponent(postId)}`);
  }

  features(): Promise<FeatureLists> {
    return this.request("/api/features");
  }

  updateFeatures(update: FeatureUpdate): Promise<FeatureLists> {
    return this.post("/api/features", update);
  }

  trends(source: TrendSource, normalize: boolean): Promise<TrendsPayload> {
    return this.request(`/api/trends?source=${source}&normalize=${normalize}`);
  }

  external(): Promise<ExternalPayload> {
    return this.request("/api/external");
  }

  correlations(): Promise<CorrelationsPayload> {
    return this.request("/api/correlations");
  }

  renameTopic(topic: number, name: string): Promise<unknown> {
    return this.post(`/api/topics/${topic}/name`, { name });
  }

  setGroups(update: GroupMapUpdate): Promise<unknown> {
    return this.post("/api/groups", update);
  }

  retrain(): Promise<RetrainAccepted> {
    return this.post("/api/retrain", {});
  }

  job(jobId: string): Promise<JobPayload> {
    return this.request(`/api/jobs/${encodeURIComponent(jobId)}`);
  }
}
