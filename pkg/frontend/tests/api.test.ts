import { describe, expect, it } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { jsonResponse, routedFetch } from "./helpers.js";

describe("ApiClient", () => {
  it("parses a successful JSON payload", async () => {
    const { fetch, calls } = routedFetch({
      "GET /api/snapshot": () =>
        jsonResponse(200, { snapshot_id: 4, parent_snapshot_id: 3 }),
    });
    const client = new ApiClient(fetch);
    const snap = await client.snapshot();
    expect(snap.snapshot_id).toBe(4);
    expect(snap.parent_snapshot_id).toBe(3);
    expect(calls[0]?.url).toBe("/api/snapshot");
  });

  it("surfaces the server error field as the message", async () => {
    const { fetch } = routedFetch({
      "POST /api/retrain": () =>
        jsonResponse(409, { error: "retrain job abc123 already in progress" }),
    });
    const client = new ApiClient(fetch);
    const err = await client.retrain().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(409);
    expect((err as ApiError).message).toContain("abc123");
  });

  it("falls back to status text when the error body is not JSON", async () => {
    const client = new ApiClient(async () => {
      return new Response("<html>oops</html>", {
        status: 500,
        statusText: "Internal Server Error",
      });
    });
    const err = await client.topics().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(500);
    expect((err as ApiError).message).toContain("500");
  });

  it("maps a network failure to status 0", async () => {
    const client = new ApiClient(async () => {
      throw new TypeError("fetch failed");
    });
    const err = await client.snapshot().catch((e: unknown) => e);
    expect(err).toBeInstanceOf(ApiError);
    expect((err as ApiError).status).toBe(0);
    expect((err as ApiError).message).toContain("unreachable");
  });

  it("encodes trend source and normalization in the query string", async () => {
    const { fetch, calls } = routedFetch({
      "GET /api/trends": () =>
        jsonResponse(200, {
          snapshot_id: 1,
          source: "lexicon",
          normalize: true,
          months: [],
          labels: [],
          values: [],
        }),
    });
    const client = new ApiClient(fetch);
    await client.trends("lexicon", true);
    expect(calls[0]?.url).toBe("/api/trends?source=lexicon&normalize=true");
    await client.trends("lda", false);
    expect(calls[1]?.url).toBe("/api/trends?source=lda&normalize=false");
  });

  it("sends feature updates as a JSON POST", async () => {
    const { fetch, calls } = routedFetch({
      "POST /api/features": () =>
        jsonResponse(200, { include_tokens: [], exclude_tokens: ["virus"] }),
    });
    const client = new ApiClient(fetch);
    const lists = await client.updateFeatures({ add_exclude: ["virus"] });
    expect(lists.exclude_tokens).toEqual(["virus"]);
    expect(calls[0]?.method).toBe("POST");
    expect(calls[0]?.body).toEqual({ add_exclude: ["virus"] });
  });

  it("passes topic and seed to the samples endpoint", async () => {
    const { fetch, calls } = routedFetch({
      "GET /api/topics/2/samples": () =>
        jsonResponse(200, {
          snapshot_id: 1,
          topic: 2,
          seed: 9,
          flagged: false,
          samples: [],
        }),
    });
    const client = new ApiClient(fetch);
    await client.samples(2, 9);
    expect(calls[0]?.url).toBe("/api/topics/2/samples?seed=9");
  });
});
