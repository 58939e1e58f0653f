/** Poll a job until it terminates, reporting every status seen. */

import type { JobStatus } from "./types.js";

export interface PollOptions {
  intervalMs?: number;
  onUpdate?: (job: JobStatus) => void;
  shouldStop?: () => boolean;
  delay?: (ms: number) => Promise<void>;
}

const sleep = (ms: number) => new Promise<void>((resolve) => setTimeout(resolve, ms));

export async function pollJob(
  fetchJob: (jobId: string) => Promise<JobStatus>,
  jobId: string,
  options: PollOptions = {},
): Promise<JobStatus> {
  const intervalMs = options.intervalMs ?? 1000;
  const delay = options.delay ?? sleep;
  for (;;) {
    const job = await fetchJob(jobId);
    options.onUpdate?.(job);
    if (job.status === "done" || job.status === "failed") return job;
    if (options.shouldStop?.()) return job;
    await delay(intervalMs);
  }
}
