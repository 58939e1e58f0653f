/** Thin wrappers over the studio service HTTP API. */

import type { AssociationMapJson, JobStatus, PaletteResponse, RunConfig } from "./types.js";

export class ApiError extends Error {
  readonly status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.status = status;
  }
}

async function raiseForStatus(resp: Response): Promise<void> {
  if (resp.ok) return;
  let detail = `${resp.status} ${resp.statusText}`;
  try {
    const body = (await resp.json()) as { detail?: string };
    if (body.detail) detail = body.detail;
  } catch {
    // not JSON: keep the status line
  }
  throw new ApiError(resp.status, detail);
}

export async function uploadPalette(
  base: string,
  file: Blob,
  k: number,
): Promise<PaletteResponse> {
  const form = new FormData();
  form.append("file", file, "upload.png");
  form.append("k", String(k));
  const resp = await fetch(`${base}/palettes`, { method: "POST", body: form });
  await raiseForStatus(resp);
  return (await resp.json()) as PaletteResponse;
}

export async function submitJob(
  base: string,
  contentId: string,
  styleId: string,
  config: RunConfig,
  associations: AssociationMapJson | null,
): Promise<string> {
  const payload: Record<string, unknown> = {
    content: contentId,
    style: styleId,
    config,
  };
  if (associations) payload.associations = associations;
  const resp = await fetch(`${base}/jobs`, {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(payload),
  });
  await raiseForStatus(resp);
  return ((await resp.json()) as { id: string }).id;
}

export async function getJob(base: string, jobId: string): Promise<JobStatus> {
  const resp = await fetch(`${base}/jobs/${jobId}`);
  await raiseForStatus(resp);
  return (await resp.json()) as JobStatus;
}

export async function cancelJob(base: string, jobId: string): Promise<void> {
  const resp = await fetch(`${base}/jobs/${jobId}`, { method: "DELETE" });
  await raiseForStatus(resp);
}

/** Snapshot URL, cache-busted by the iteration so polls refresh the <img>. */
export function jobImageUrl(
  base: string,
  jobId: string,
  iter: number | "latest" | "final",
): string {
  return `${base}/jobs/${jobId}/image?iter=${iter}&v=${iter}`;
}
