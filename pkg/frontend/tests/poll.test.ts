import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import type { ApiClient } from "../src/api.js";
import type { JobPayload } from "../src/types.js";
import { MIN_POLL_INTERVAL_MS, pollJob } from "../src/poll.js";

function jobPayload(state: JobPayload["state"]): JobPayload {
  return {
    job_id: "j1",
    state,
    started_utc: null,
    finished_utc: null,
    snapshot_id: null,
    error: state === "Failed" ? "boom" : null,
  };
}

function fakeApi(states: JobPayload["state"][]): {
  api: ApiClient;
  calls: () => number;
} {
  let i = 0;
  const api = {
    job: async () => {
      const state = states[Math.min(i, states.length - 1)] as JobPayload["state"];
      i += 1;
      return jobPayload(state);
    },
  } as unknown as ApiClient;
  return { api, calls: () => i };
}

describe("pollJob", () => {
  beforeEach(() => {
    vi.useFakeTimers();
  });
  afterEach(() => {
    vi.useRealTimers();
  });

  it("waits a full interval before the first poll", async () => {
    const { api, calls } = fakeApi(["Done"]);
    const poller = pollJob(api, "j1", () => {});
    await vi.advanceTimersByTimeAsync(999);
    expect(calls()).toBe(0);
    await vi.advanceTimersByTimeAsync(1);
    expect(calls()).toBe(1);
    await expect(poller.done).resolves.toMatchObject({ state: "Done" });
  });

  it("clamps sub-second intervals up to the minimum", async () => {
    expect(MIN_POLL_INTERVAL_MS).toBe(1000);
    const { api, calls } = fakeApi(["Running", "Done"]);
    pollJob(api, "j1", () => {}, 10);
    await vi.advanceTimersByTimeAsync(990);
    expect(calls()).toBe(0);
    await vi.advanceTimersByTimeAsync(10);
    expect(calls()).toBe(1);
    // second poll must also wait the clamped interval, not 10ms
    await vi.advanceTimersByTimeAsync(500);
    expect(calls()).toBe(1);
    await vi.advanceTimersByTimeAsync(500);
    expect(calls()).toBe(2);
  });

  it("reports every observed state and stops polling once terminal", async () => {
    const seen: string[] = [];
    const { api, calls } = fakeApi(["Queued", "Running", "Done"]);
    const poller = pollJob(api, "j1", (job) => seen.push(job.state));
    await vi.advanceTimersByTimeAsync(3000);
    expect(seen).toEqual(["Queued", "Running", "Done"]);
    await expect(poller.done).resolves.toMatchObject({ state: "Done" });
    await vi.advanceTimersByTimeAsync(10_000);
    expect(calls()).toBe(3);
  });

  it("resolves on Failed as a terminal state", async () => {
    const { api } = fakeApi(["Failed"]);
    const poller = pollJob(api, "j1", () => {});
    await vi.advanceTimersByTimeAsync(1000);
    const finished = await poller.done;
    expect(finished.state).toBe("Failed");
    expect(finished.error).toBe("boom");
  });

  it("rejects when a poll request fails", async () => {
    const api = {
      job: async () => {
        throw new Error("gone");
      },
    } as unknown as ApiClient;
    const poller = pollJob(api, "j1", () => {});
    const settled = expect(poller.done).rejects.toThrow("gone");
    await vi.advanceTimersByTimeAsync(1000);
    await settled;
  });

  it("stop() cancels future polls", async () => {
    const { api, calls } = fakeApi(["Running", "Running", "Done"]);
    const poller = pollJob(api, "j1", () => {});
    await vi.advanceTimersByTimeAsync(1000);
    expect(calls()).toBe(1);
    poller.stop();
    await vi.advanceTimersByTimeAsync(10_000);
    expect(calls()).toBe(1);
  });
});
