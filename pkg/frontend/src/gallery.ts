/**
 * Session gallery: every completed (or cancelled) run of this session, kept
 * with its resolved config so any two runs can be A/B compared.
 */

import type { JobStatus, LossPoint } from "./types.js";

export interface GalleryEntry {
  jobId: string;
  label: string;
  status: string;
  error: string | null;
  config: Record<string, unknown>;
  losses: LossPoint[];
  finishedAt: number;
}

export interface ConfigDiff {
  [key: string]: { a: unknown; b: unknown };
}

function flatten(obj: Record<string, unknown>, prefix = ""): Map<string, unknown> {
  const out = new Map<string, unknown>();
  for (const [key, value] of Object.entries(obj)) {
    const path = prefix ? `${prefix}.${key}` : key;
    if (value !== null && typeof value === "object" && !Array.isArray(value)) {
      for (const [k, v] of flatten(value as Record<string, unknown>, path)) {
        out.set(k, v);
      }
    } else {
      out.set(path, value);
    }
  }
  return out;
}

/** Keys whose values differ between two configs (flattened dotted paths). */
export function diffConfigs(
  a: Record<string, unknown>,
  b: Record<string, unknown>,
): ConfigDiff {
  const fa = flatten(a);
  const fb = flatten(b);
  const diff: ConfigDiff = {};
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
  private entries: GalleryEntry[] = [];
  private counter = 0;

  addFromJob(job: JobStatus, now: number = Date.now()): GalleryEntry {
    this.counter += 1;
    const entry: GalleryEntry = {
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

  list(): readonly GalleryEntry[] {
    return this.entries;
  }

  get(jobId: string): GalleryEntry | undefined {
    return this.entries.find((e) => e.jobId === jobId);
  }

  /** Compare two gallery entries by job id. */
  compare(jobIdA: string, jobIdB: string): ConfigDiff {
    const a = this.get(jobIdA);
    const b = this.get(jobIdB);
    if (!a || !b) throw new Error("both runs must be in the gallery");
    return diffConfigs(a.config, b.config);
  }

  /** Job ids, oldest first; enough to rebuild the gallery from the service. */
  jobIds(): string[] {
    return this.entries.map((e) => e.jobId);
  }
}
