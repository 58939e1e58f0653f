/** Thin wrappers over the studio service HTTP API. */
export class ApiError extends Error {
    constructor(status, detail) {
        super(detail);
        this.status = status;
    }
}
async function raiseForStatus(resp) {
    if (resp.ok)
        return;
    let detail = `${resp.status} ${resp.statusText}`;
    try {
        const body = (await resp.json());
        if (body.detail)
            detail = body.detail;
    }
    catch {
        // not JSON: keep the status line
    }
    throw new ApiError(resp.status, detail);
}
export async function uploadPalette(base, file, k) {
    const form = new FormData();
    form.append("file", file, "upload.png");
    form.append("k", String(k));
    const resp = await fetch(`${base}/palettes`, { method: "POST", body: form });
    await raiseForStatus(resp);
    return (await resp.json());
}
export async function submitJob(base, contentId, styleId, config, associations) {
    const payload = {
        content: contentId,
        style: styleId,
        config,
    };
    if (associations)
        payload.associations = associations;
    const resp = await fetch(`${base}/jobs`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(payload),
    });
    await raiseForStatus(resp);
    return (await resp.json()).id;
}
export async function getJob(base, jobId) {
    const resp = await fetch(`${base}/jobs/${jobId}`);
    await raiseForStatus(resp);
    return (await resp.json());
}
export async function cancelJob(base, jobId) {
    const resp = await fetch(`${base}/jobs/${jobId}`, { method: "DELETE" });
    await raiseForStatus(resp);
}
/** Snapshot URL, cache-busted by the iteration so polls refresh the <img>. */
export function jobImageUrl(base, jobId, iter) {
    return `${base}/jobs/${jobId}/image?iter=${iter}&v=${iter}`;
}
