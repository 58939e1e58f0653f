/** Poll a job until it terminates, reporting every status seen. */
const sleep = (ms) => new Promise((resolve) => setTimeout(resolve, ms));
export async function pollJob(fetchJob, jobId, options = {}) {
    const intervalMs = options.intervalMs ?? 1000;
    const delay = options.delay ?? sleep;
    for (;;) {
        const job = await fetchJob(jobId);
        options.onUpdate?.(job);
        if (job.status === "done" || job.status === "failed")
            return job;
        if (options.shouldStop?.())
            return job;
        await delay(intervalMs);
    }
}
