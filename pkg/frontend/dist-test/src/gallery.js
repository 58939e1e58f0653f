/**
 * Session gallery: every completed (or cancelled) run of this session, kept
 * with its resolved config so any two runs can be A/B compared.
 */
function flatten(obj, prefix = "") {
    const out = new Map();
    for (const [key, value] of Object.entries(obj)) {
        const path = prefix ? `${prefix}.${key}` : key;
        if (value !== null && typeof value === "object" && !Array.isArray(value)) {
            for (const [k, v] of flatten(value, path)) {
                out.set(k, v);
            }
        }
        else {
            out.set(path, value);
        }
    }
    return out;
}
/** Keys whose values differ between two configs (flattened dotted paths). */
export function diffConfigs(a, b) {
    const fa = flatten(a);
    const fb = flatten(b);
    const diff = {};
    for (const key of new Set([...fa.keys(), ...fb.keys()])) {
        const va = fa.get(key);
        const vb = fb.get(key);
        if (JSON.stringify(va) !== JSON.stringify(vb)) {
            diff[key] = { a: va, b: vb };
        }
    }
    return diff;
}
export class SessionGallery {
    constructor() {
        this.entries = [];
        this.counter = 0;
    }
    addFromJob(job, now = Date.now()) {
        this.counter += 1;
        const entry = {
            jobId: job.id,
            label: `run ${this.counter}`,
            status: job.error === "cancelled" ? "cancelled" : job.status,
            error: job.error,
            config: job.config,
            losses: job.loss_history,
            finishedAt: now,
        };
        this.entries.push(entry);
        return entry;
    }
    list() {
        return this.entries;
    }
    get(jobId) {
        return this.entries.find((e) => e.jobId === jobId);
    }
    /** Compare two gallery entries by job id. */
    compare(jobIdA, jobIdB) {
        const a = this.get(jobIdA);
        const b = this.get(jobIdB);
        if (!a || !b)
            throw new Error("both runs must be in the gallery");
        return diffConfigs(a.config, b.config);
    }
    /** Job ids, oldest first; enough to rebuild the gallery from the service. */
    jobIds() {
        return this.entries.map((e) => e.jobId);
    }
}
