// Retrain job polling. The service contract allows polling at 1 Hz or
// slower, so faster intervals are clamped up rather than honored.

import type { ApiClient } from "./api.js";
import type { JobPayload } from "./types.js";

export const MIN_POLL_INTERVAL_MS = 1000;

export interface JobPoller {
  done: Promise<JobPayload>;
  stop: () => void;
}

export function pollJob(
  api: ApiClient,
  jobId: string,
  onUpdate: (job: JobPayload) => void,
  intervalMs: number = MIN_POLL_INTERVAL_MS,
): JobPoller {
  const interval = Math.max(MIN_POLL_INTERVAL_MS, intervalMs);
  let timer: ReturnType<typeof setTimeout> | null = null;
  let stopped = false;

  const done = new Promise<JobPayload>((resolve, reject) => {
    const tick = async () => {
      if (stopped) return;
      let job: JobPayload;
      try {
        job = await api.job(jobId);
      } catch (err) {
        reject(err);
        return;
      }
      if (stopped) return;
      onUpdate(job);
      if (job.state === "Done" || job.state === "Failed") {
        resolve(job);
        return;
      }
      timer = setTimeout(tick, interval);
    };
    timer = setTimeout(tick, interval);
  });

  return {
    done,
    stop: () => {
      stopped = true;
      if (timer !== null) clearTimeout(timer);
    },
  };
}
