/**
 * Studio app: upload a content and a style image, inspect their palettes,
 * draw color associations (click a content swatch, then a style swatch),
 * discard swatches (double-click), tune the mask fall-off, run auto or
 * manual transfers, watch live losses and snapshots, and compare runs.
 *
 * All state beyond the service lives in one Session object persisted to
 * localStorage, so a refresh rebuilds the page from the service + the draft.
 */
import { ApiError, cancelJob, getJob, jobImageUrl, submitJob, uploadPalette } from "./api.js";
import { AssociationDraft } from "./association.js";
import { SessionGallery, diffConfigs } from "./gallery.js";
import { pollJob } from "./poll.js";
import { sparklinePoints } from "./sparkline.js";
const API_BASE = new URLSearchParams(location.search).get("api") ?? "";
const STORAGE_KEY = "cams-studio-session";
const state = {
    content: null,
    style: null,
    draftJson: null,
    galleryJobIds: [],
    sigma: 0.275,
    iterations: 300,
    paletteK: 5,
    beta: 1e4,
    mode: "auto",
};
let draft = null;
let pendingContentSwatch = null;
let activeJobId = null;
let stopRequested = false;
const gallery = new SessionGallery();
const $ = (id) => {
    const el = document.getElementById(id);
    if (!el)
        throw new Error(`missing element #${id}`);
    return el;
};
function css(color) {
    const [r, g, b] = color;
    return `rgb(${Math.round(r * 255)}, ${Math.round(g * 255)}, ${Math.round(b * 255)})`;
}
function persist() {
    state.draftJson = draft ? draft.export() : null;
    state.galleryJobIds = gallery.jobIds();
    localStorage.setItem(STORAGE_KEY, JSON.stringify(state));
}
function banner(message) {
    const box = $("banner");
    box.textContent = message;
    box.classList.remove("hidden");
}
$("banner").addEventListener("click", () => $("banner").classList.add("hidden"));
function hint(message) {
    const el = $("hint");
    el.textContent = message;
    el.classList.add("flash");
    setTimeout(() => el.classList.remove("flash"), 900);
}
function resetDraft() {
    if (state.content && state.style) {
        draft = new AssociationDraft(state.content.colors.length, state.style.colors.length);
    }
    else {
        draft = null;
    }
    pendingContentSwatch = null;
}
function renderSwatches(side, palette) {
    const row = $(`${side}-swatches`);
    row.innerHTML = "";
    const note = $(`${side}-note`);
    note.textContent = "";
    if (!palette)
        return;
    palette.colors.forEach((color, index) => {
        const el = document.createElement("button");
        el.className = "swatch";
        el.style.background = css(color);
        el.title = `${side} #${index} (population ${palette.populations[index] ?? "?"})`;
        el.dataset.side = side;
        el.dataset.index = String(index);
        const st = draft?.stateOf(side, index) ?? "free";
        el.classList.toggle("discarded", st === "discarded");
        el.classList.toggle("paired", st === "paired");
        if (side === "content" && pendingContentSwatch === index)
            el.classList.add("armed");
        el.addEventListener("click", () => onSwatchClick(side, index));
        el.addEventListener("dblclick", () => onSwatchDiscard(side, index));
        row.appendChild(el);
    });
    if (palette.degenerate) {
        note.textContent =
            side === "style"
                ? `only ${palette.colors.length} distinct colors; limited styles to transfer`
                : `only ${palette.colors.length} distinct colors found`;
    }
}
function renderPairs() {
    const svg = $("pair-lines");
    svg.innerHTML = "";
    const list = $("pair-list");
    list.innerHTML = "";
    if (!draft || !state.content || !state.style)
        return;
    const svgBox = svg.getBoundingClientRect();
    for (const [ci, si] of draft.pairs) {
        const cEl = document.querySelector(`[data-side="content"][data-index="${ci}"]`);
        const sEl = document.querySelector(`[data-side="style"][data-index="${si}"]`);
        if (cEl && sEl) {
            const a = cEl.getBoundingClientRect();
            const b = sEl.getBoundingClientRect();
            const line = document.createElementNS("http://www.w3.org/2000/svg", "line");
            line.setAttribute("x1", String(a.left + a.width / 2 - svgBox.left));
            line.setAttribute("y1", String(a.bottom - svgBox.top));
            line.setAttribute("x2", String(b.left + b.width / 2 - svgBox.left));
            line.setAttribute("y2", String(b.top - svgBox.top));
            line.setAttribute("stroke", css(state.content.colors[ci]));
            line.setAttribute("stroke-width", "3");
            svg.appendChild(line);
        }
        const item = document.createElement("li");
        item.textContent = `content #${ci} -> style #${si}`;
        const remove = document.createElement("button");
        remove.textContent = "x";
        remove.addEventListener("click", () => {
            draft?.unpair(ci, si);
            refresh();
        });
        item.appendChild(remove);
        list.appendChild(item);
    }
}
function onSwatchClick(side, index) {
    if (!draft)
        return;
    if (side === "content") {
        if (draft.stateOf("content", index) === "discarded") {
            hint("that swatch is discarded; double-click to restore it");
            return;
        }
        pendingContentSwatch = pendingContentSwatch === index ? null : index;
    }
    else {
        if (pendingContentSwatch === null) {
            hint("click a content swatch first, then a style swatch");
            return;
        }
        const blocked = draft.pairBlocked(pendingContentSwatch, index);
        if (blocked) {
            hint(blocked);
            return;
        }
        draft.pair(pendingContentSwatch, index);
        pendingContentSwatch = null;
    }
    refresh();
}
function onSwatchDiscard(side, index) {
    if (!draft)
        return;
    draft.toggleDiscard(side, index);
    if (side === "content" && pendingContentSwatch === index)
        pendingContentSwatch = null;
    refresh();
}
function refresh() {
    renderSwatches("content", state.content);
    renderSwatches("style", state.style);
    renderPairs();
    persist();
}
async function onUpload(side, file) {
    try {
        const palette = await uploadPalette(API_BASE, file, state.paletteK);
        state[side] = palette;
        const img = $(`${side}-preview`);
        img.src = URL.createObjectURL(file);
        resetDraft();
        refresh();
    }
    catch (err) {
        banner(err instanceof ApiError ? `upload rejected: ${err.message}` : String(err));
    }
}
function wireDropzone(side) {
    const zone = $(`${side}-zone`);
    const input = $(`${side}-file`);
    zone.addEventListener("click", () => input.click());
    zone.addEventListener("dragover", (e) => e.preventDefault());
    zone.addEventListener("drop", (e) => {
        e.preventDefault();
        const file = e.dataTransfer?.files[0];
        if (file)
            void onUpload(side, file);
    });
    input.addEventListener("change", () => {
        const file = input.files?.[0];
        if (file)
            void onUpload(side, file);
    });
}
function runConfig() {
    return {
        sigma: state.sigma,
        palette_k: state.paletteK,
        iterations: state.iterations,
        beta: state.beta,
        mode: state.mode,
        snapshot_every: Math.max(1, Math.min(25, Math.floor(state.iterations / 10))),
    };
}
function renderJob(job) {
    $("job-status").textContent =
        job.status === "failed" && job.error
            ? `${job.status}: ${job.error}`
            : `${job.status} (${job.progress.iter}/${job.progress.total_iters})`;
    const poly = $("sparkline-path");
    poly.setAttribute("points", sparklinePoints(job.loss_history));
    const latest = job.loss_history[job.loss_history.length - 1];
    $("loss-readout").textContent = latest
        ? `iter ${latest.iter}: total ${latest.total.toExponential(3)}`
        : "";
    if (job.progress.iter > 0 || job.status === "done") {
        const img = $("snapshot");
        img.src = jobImageUrl(API_BASE, job.id, job.status === "done" ? "final" : job.progress.iter);
    }
}
function renderGallery() {
    const grid = $("gallery");
    grid.innerHTML = "";
    for (const entry of gallery.list()) {
        const card = document.createElement("div");
        card.className = "card";
        const img = document.createElement("img");
        img.src = jobImageUrl(API_BASE, entry.jobId, entry.status === "done" ? "final" : "latest");
        img.alt = entry.label;
        const title = document.createElement("div");
        title.textContent = `${entry.label}: ${entry.status}${entry.error && entry.status !== "cancelled" ? ` (${entry.error})` : ""}`;
        const pick = document.createElement("input");
        pick.type = "checkbox";
        pick.dataset.jobId = entry.jobId;
        pick.addEventListener("change", renderComparison);
        card.append(pick, img, title);
        grid.appendChild(card);
    }
}
function renderComparison() {
    const picked = [...document.querySelectorAll("#gallery input:checked")];
    const box = $("compare");
    box.innerHTML = "";
    if (picked.length !== 2)
        return;
    const [a, b] = picked;
    const ea = gallery.get(a.dataset.jobId);
    const eb = gallery.get(b.dataset.jobId);
    if (!ea || !eb)
        return;
    const diff = diffConfigs(ea.config, eb.config);
    const table = document.createElement("table");
    const header = table.insertRow();
    header.insertCell().textContent = "setting";
    header.insertCell().textContent = ea.label;
    header.insertCell().textContent = eb.label;
    for (const [key, { a: va, b: vb }] of Object.entries(diff)) {
        const row = table.insertRow();
        row.insertCell().textContent = key;
        row.insertCell().textContent = JSON.stringify(va);
        row.insertCell().textContent = JSON.stringify(vb);
    }
    box.appendChild(Object.keys(diff).length ? table : Object.assign(document.createElement("p"), { textContent: "identical configs" }));
}
async function onRun() {
    if (!state.content || !state.style) {
        banner("upload a content and a style image first");
        return;
    }
    let associations = null;
    if (state.mode === "manual") {
        if (!draft || draft.pairs.length === 0) {
            banner("manual mode needs at least one association pair");
            return;
        }
        associations = draft.toJson();
    }
    try {
        stopRequested = false;
        const jobId = await submitJob(API_BASE, state.content.id, state.style.id, runConfig(), associations);
        activeJobId = jobId;
        $("run").setAttribute("disabled", "");
        $("cancel").removeAttribute("disabled");
        const final = await pollJob((id) => getJob(API_BASE, id), jobId, {
            intervalMs: 1000,
            onUpdate: renderJob,
        });
        gallery.addFromJob(final);
        renderGallery();
        persist();
    }
    catch (err) {
        banner(err instanceof ApiError ? err.message : String(err));
    }
    finally {
        activeJobId = null;
        $("run").removeAttribute("disabled");
        $("cancel").setAttribute("disabled", "");
    }
}
async function onCancel() {
    if (!activeJobId)
        return;
    stopRequested = true;
    try {
        await cancelJob(API_BASE, activeJobId);
    }
    catch (err) {
        banner(String(err));
    }
}
function onExport() {
    if (!draft) {
        banner("no palettes loaded; nothing to export");
        return;
    }
    const blob = new Blob([draft.export()], { type: "application/json" });
    const a = document.createElement("a");
    a.href = URL.createObjectURL(blob);
    a.download = "associations.json";
    a.click();
}
function onImport(file) {
    if (!state.content || !state.style) {
        banner("upload both images before importing associations");
        return;
    }
    void file.text().then((text) => {
        try {
            draft = AssociationDraft.import(text, state.content.colors.length, state.style.colors.length);
            refresh();
        }
        catch (err) {
            banner(`import failed: ${String(err)}`);
        }
    });
}
async function rehydrate() {
    const raw = localStorage.getItem(STORAGE_KEY);
    if (!raw)
        return;
    try {
        const saved = JSON.parse(raw);
        Object.assign(state, saved);
        if (state.content && state.style && state.draftJson) {
            draft = AssociationDraft.import(state.draftJson, state.content.colors.length, state.style.colors.length);
        }
        else {
            resetDraft();
        }
        for (const jobId of saved.galleryJobIds ?? []) {
            try {
                gallery.addFromJob(await getJob(API_BASE, jobId));
            }
            catch {
                // service restarted; that run is gone
            }
        }
    }
    catch {
        localStorage.removeItem(STORAGE_KEY);
    }
}
function wireControls() {
    const sigma = $("sigma");
    sigma.value = String(state.sigma);
    $("sigma-value").textContent = sigma.value;
    sigma.addEventListener("input", () => {
        state.sigma = Number(sigma.value);
        $("sigma-value").textContent = sigma.value;
        persist();
    });
    const iters = $("iterations");
    iters.value = String(state.iterations);
    iters.addEventListener("change", () => {
        state.iterations = Math.max(1, Number(iters.value) | 0);
        persist();
    });
    const k = $("palette-k");
    k.value = String(state.paletteK);
    k.addEventListener("change", () => {
        state.paletteK = Math.max(1, Number(k.value) | 0);
        persist();
    });
    const beta = $("beta");
    beta.value = String(state.beta);
    beta.addEventListener("change", () => {
        state.beta = Number(beta.value);
        persist();
    });
    const mode = $("mode");
    mode.value = state.mode;
    mode.addEventListener("change", () => {
        state.mode = mode.value === "manual" ? "manual" : "auto";
        persist();
    });
    $("run").addEventListener("click", () => void onRun());
    $("cancel").addEventListener("click", () => void onCancel());
    $("export").addEventListener("click", onExport);
    const importInput = $("import-file");
    $("import").addEventListener("click", () => importInput.click());
    importInput.addEventListener("change", () => {
        const file = importInput.files?.[0];
        if (file)
            onImport(file);
    });
}
async function start() {
    wireDropzone("content");
    wireDropzone("style");
    wireControls();
    await rehydrate();
    refresh();
    renderGallery();
}
void start();
