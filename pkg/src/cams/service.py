"""HTTP API backing the studio UI.

Single-process, in-memory job queue: uploads and job state live in dicts
guarded by one lock, jobs run on a small thread pool (one worker by default;
the optimizer saturates the compute device, so queueing beats oversubscribing)
and artifacts optionally spill to a data directory. Reads copy state out under
the lock, so pollers always see a consistent snapshot.
"""

from __future__ import annotations

import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, File, Form, HTTPException, Request, Response, UploadFile
from fastapi.middleware.cors import CORSMiddleware

from .errors import CamsError, DecodeError, InvalidAssociation
from .features import FeatureExtractor
from .imaging import decode_png_bytes, encode_png
from .losses import LossWeights
from .palette import extract_palette
from .transfer import AssociationMap, TransferConfig, run_classic_nst, run_transfer

MAX_UPLOAD_BYTES = 20 * 1024 * 1024

_CONFIG_KEYS = {
    "sigma",
    "palette_k",
    "tau_merge",
    "smooth_masks",
    "iterations",
    "learning_rate",
    "mode",
    "seed",
    "snapshot_every",
    "max_side",
    "detach_masks",
    "alpha",
    "beta",
    "baseline",
}


@dataclass
class Job:
    id: str
    cfg: TransferConfig
    baseline: bool
    content_id: str
    style_id: str
    status: str = "queued"
    error: str | None = None
    progress_iter: int = 0
    total_iters: int = 0
    latest_losses: dict | None = None
    loss_history: list[dict] = field(default_factory=list)
    snapshots: list[tuple[int, bytes]] = field(default_factory=list)
    final_png: bytes | None = None
    cancel: threading.Event = field(default_factory=threading.Event)


def _parse_config(data: dict | None, associations: AssociationMap | None) -> tuple[TransferConfig, bool]:
    data = dict(data or {})
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    baseline = bool(data.pop("baseline", False))
    alpha = float(data.pop("alpha", 1.0))
    beta = float(data.pop("beta", 1.0e4))
    if associations is not None:
        data.setdefault("mode", "manual")
    cfg = TransferConfig(
        weights=LossWeights(alpha=alpha, beta=beta), associations=associations, **data
    )
    cfg.validate()
    return cfg, baseline


def create_app(
    extractor: FeatureExtractor,
    data_dir: str | None = None,
    pool_size: int = 1,
    max_upload_bytes: int = MAX_UPLOAD_BYTES,
    ui_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="cams studio service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    lock = threading.Lock()
    uploads: dict[str, object] = {}
    jobs: dict[str, Job] = {}
    pool = ThreadPoolExecutor(max_workers=max(1, pool_size))
    spill_root = Path(data_dir) if data_dir else None
    if spill_root:
        spill_root.mkdir(parents=True, exist_ok=True)

    async def _read_upload(file: UploadFile) -> bytes:
        data = await file.read()
        if len(data) > max_upload_bytes:
            raise HTTPException(status_code=413, detail="upload too large")
        return data

    def _store_upload(data: bytes) -> tuple[str, object]:
        try:
            img = decode_png_bytes(data)
        except DecodeError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        image_id = uuid.uuid4().hex
        with lock:
            uploads[image_id] = img
        if spill_root:
            updir = spill_root / "uploads"
            updir.mkdir(exist_ok=True)
            (updir / f"{image_id}.png").write_bytes(encode_png(img))
        return image_id, img

    @app.post("/images")
    async def post_image(file: UploadFile = File(...)):
        image_id, _ = _store_upload(await _read_upload(file))
        return {"id": image_id}

    @app.post("/palettes")
    async def post_palette(file: UploadFile = File(...), k: int = Form(5)):
        if k < 1:
            raise HTTPException(status_code=400, detail="k must be >= 1")
        image_id, img = _store_upload(await _read_upload(file))
        pal = extract_palette(img, k)
        return {
            "id": image_id,
            "colors": [list(c) for c in pal.colors],
            "tags": list(pal.source_tags),
            "populations": list(pal.populations),
            "degenerate": pal.degenerate,
        }

    def _get_image(image_id: str):
        with lock:
            img = uploads.get(image_id)
        if img is None:
            raise HTTPException(status_code=404, detail=f"unknown image ref: {image_id}")
        return img

    def _execute(job: Job, content, style):
        with lock:
            if job.cancel.is_set():
                job.status = "failed"
                job.error = "cancelled"
                return
            job.status = "running"

        def on_progress(iteration, rec, image):
            png = encode_png(image)
            losses = {"content": rec.content, "style_term": rec.style_term, "total": rec.total}
            with lock:
                job.progress_iter = iteration
                job.latest_losses = losses
                job.loss_history.append({"iter": iteration, **losses})
                job.snapshots.append((iteration, png))
            if spill_root:
                jdir = spill_root / "jobs" / job.id
                jdir.mkdir(parents=True, exist_ok=True)
                (jdir / f"iter_{iteration:05d}.png").write_bytes(png)

        def should_stop():
            return job.cancel.is_set()

        try:
            runner = run_classic_nst if job.baseline else run_transfer
            result = runner(
                content, style, job.cfg, extractor,
                on_progress=on_progress, should_stop=should_stop,
            )
        except Exception as exc:  # job isolation: any failure lands in the status
            with lock:
                job.status = "failed"
                job.error = str(exc)
            return

        final_png = encode_png(result.image)
        history = [
            {"iter": r.iteration, "content": r.content, "style_term": r.style_term, "total": r.total}
            for r in result.loss_history
        ]
        with lock:
            if result.cancelled:
                job.status = "failed"
                job.error = "cancelled"
            else:
                job.status = "done"
            job.final_png = final_png
            job.loss_history = history
            job.progress_iter = result.iterations_run
        if spill_root:
            jdir = spill_root / "jobs" / job.id
            jdir.mkdir(parents=True, exist_ok=True)
            (jdir / "final.png").write_bytes(final_png)

    @app.post("/jobs", status_code=202)
    async def post_job(request: Request):
        body = await request.json()
        content_id = body.get("content")
        style_id = body.get("style")
        if not content_id or not style_id:
            raise HTTPException(status_code=400, detail="job needs 'content' and 'style' image refs")
        content = _get_image(content_id)
        style = _get_image(style_id)
        try:
            associations = (
                AssociationMap.from_dict(body["associations"])
                if body.get("associations") is not None
                else None
            )
            cfg, baseline = _parse_config(body.get("config"), associations)
            if cfg.mode == "manual" and not baseline:
                cfg.associations.validate(
                    extract_palette(content, cfg.palette_k, tag="content"),
                    extract_palette(style, cfg.palette_k, tag="style"),
                )
        except (ValueError, TypeError, InvalidAssociation, CamsError) as exc:
            raise HTTPException(status_code=400, detail=str(exc))

        job = Job(
            id=uuid.uuid4().hex,
            cfg=cfg,
            baseline=baseline,
            content_id=content_id,
            style_id=style_id,
            total_iters=cfg.iterations,
        )
        with lock:
            jobs[job.id] = job
        pool.submit(_execute, job, content, style)
        return {"id": job.id}

    def _get_job(job_id: str) -> Job:
        with lock:
            job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail=f"unknown job id: {job_id}")
        return job

    @app.get("/jobs/{job_id}")
    def get_job(job_id: str):
        job = _get_job(job_id)
        with lock:
            return {
                "id": job.id,
                "status": job.status,
                "error": job.error,
                "baseline": job.baseline,
                "progress": {
                    "iter": job.progress_iter,
                    "total_iters": job.total_iters,
                    "losses": dict(job.latest_losses) if job.latest_losses else None,
                },
                "loss_history": [dict(r) for r in job.loss_history],
                "config": job.cfg.to_dict(),
            }

    @app.get("/jobs/{job_id}/image")
    def get_job_image(job_id: str, iter: str = "latest"):
        job = _get_job(job_id)
        with lock:
            snapshots = list(job.snapshots)
            final_png = job.final_png
            status = job.status
        if iter == "final":
            if final_png is None:
                raise HTTPException(status_code=409, detail="job has no final image yet")
            return Response(content=final_png, media_type="image/png")
        if iter == "latest":
            if final_png is not None and status in ("done", "failed"):
                return Response(content=final_png, media_type="image/png")
            if not snapshots:
                raise HTTPException(status_code=409, detail="no snapshot produced yet")
            return Response(content=snapshots[-1][1], media_type="image/png")
        try:
            wanted = int(iter)
        except ValueError:
            raise HTTPException(status_code=400, detail="iter must be 'latest', 'final' or an integer")
        for iteration, png in snapshots:
            if iteration == wanted:
                return Response(content=png, media_type="image/png")
        raise HTTPException(status_code=404, detail=f"no snapshot at iteration {wanted}")

    @app.delete("/jobs/{job_id}")
    def delete_job(job_id: str):
        job = _get_job(job_id)
        job.cancel.set()
        with lock:
            status = job.status
        return {"id": job.id, "status": status, "cancelling": status in ("queued", "running")}

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="studio")

    return app
