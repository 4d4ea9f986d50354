"""HTTP JSON API over built datasets.

Single-user local service: dataset listing and upload (background build
jobs with polling), viewport point/label/contour queries, point detail,
timeline frames, seeded viewport summaries, and overlays. Wire formats:
bbox is "minx,miny,maxx,maxy" in layout units; instants are ISO-8601.
Field names are documented in docs/api.md and are normative for the UI.
"""

from __future__ import annotations

import json
import logging
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import timedelta

import numpy as np
from fastapi import FastAPI, File, Form, Query, Request, UploadFile
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, Response

from . import store
from .config import Config, load_config
from .errors import (
    BadBBox,
    BadRequest,
    BadWindow,
    TracemapError,
    UnknownJob,
)
from .events import format_instant, parse_instant
from .mapview import Bbox, RemoteSummaryProvider, TimeWindow

log = logging.getLogger(__name__)

_STATUS_BY_CODE = {
    "UnknownDataset": 404,
    "UnknownPoint": 404,
    "UnknownJob": 404,
    "BadBBox": 400,
    "BadWindow": 400,
    "BadRequest": 400,
    "MalformedExport": 400,
    "UnsupportedFormat": 400,
    "ConfigError": 400,
    "ProviderMismatch": 409,
    "ProviderUnavailable": 503,
}

JOB_ORDER = ["queued", "ingesting", "embedding", "reducing", "labeling",
             "done", "failed"]


@dataclass
class BuildJob:
    job_id: str
    status: str = "queued"
    stage: str | None = None
    detail: str | None = None
    dataset_id: str | None = None
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def advance(self, status: str) -> None:
        # monotone: never move backwards, never leave a terminal state
        with self.lock:
            if self.status in ("done", "failed"):
                return
            if JOB_ORDER.index(status) > JOB_ORDER.index(self.status):
                self.status = status

    def finish(self, dataset_id: str) -> None:
        with self.lock:
            if self.status not in ("done", "failed"):
                self.status = "done"
                self.dataset_id = dataset_id

    def fail(self, stage: str, detail: str) -> None:
        with self.lock:
            if self.status not in ("done", "failed"):
                self.status = "failed"
                self.stage = stage
                self.detail = detail

    def to_json_obj(self) -> dict:
        with self.lock:
            out = {"job_id": self.job_id, "status": self.status}
            if self.status == "failed":
                out["stage"] = self.stage
                out["detail"] = self.detail
            if self.dataset_id:
                out["dataset_id"] = self.dataset_id
            return out


class AppState:
    def __init__(self, config: Config):
        self.config = config
        self.data_root = config.data_root
        self.views: dict[str, store.DatasetView] = {}
        self.views_lock = threading.Lock()
        self.jobs: dict[str, BuildJob] = {}
        self.jobs_lock = threading.Lock()
        self.overlays: dict[str, store.OverlayResult] = {}
        self.overlays_lock = threading.Lock()
        # one build at a time keeps per-dataset serialization trivially true
        self.builder = ThreadPoolExecutor(max_workers=1,
                                          thread_name_prefix="tracemap-build")
        endpoint = config.map.get("summary_endpoint")
        self.summary_provider = (
            RemoteSummaryProvider(endpoint) if endpoint else None
        )

    def get_view(self, dataset_id: str) -> store.DatasetView:
        with self.views_lock:
            view = self.views.get(dataset_id)
        if view is not None:
            return view
        dataset = store.load_dataset(self.data_root, dataset_id)
        view = store.DatasetView(dataset)
        with self.views_lock:
            self.views[dataset_id] = view
        return view

    def get_overlay(self, overlay_id: str) -> store.OverlayResult:
        with self.overlays_lock:
            got = self.overlays.get(overlay_id)
        if got is not None:
            return got
        overlay = store.load_overlay(self.data_root, overlay_id)
        with self.overlays_lock:
            self.overlays[overlay_id] = overlay
        return overlay


def parse_bbox(raw: str | None) -> Bbox | None:
    if raw is None or raw == "":
        return None
    parts = raw.split(",")
    if len(parts) != 4:
        raise BadBBox('bbox must be "minx,miny,maxx,maxy"')
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise BadBBox(f"bbox has non-numeric coordinates: {raw!r}")
    return Bbox(*vals).validate()


def parse_window(from_raw: str | None, to_raw: str | None,
                 view: store.DatasetView) -> TimeWindow | None:
    if not from_raw and not to_raw:
        return None

    def instant(raw: str, name: str):
        try:
            return parse_instant(raw)
        except Exception:
            raise BadWindow(f"{name} is not a valid ISO-8601 instant: {raw!r}")

    manifest = view.dataset.manifest
    start = instant(from_raw, "from") if from_raw else parse_instant(manifest.time_min)
    if to_raw:
        end = instant(to_raw, "to")
    else:
        # open-ended window: one tick past the newest event keeps it inside
        end = parse_instant(manifest.time_max) + timedelta(microseconds=1)
    return TimeWindow(start, end)


def _json(payload: dict, status_code: int = 200) -> Response:
    # plain json.dumps: these payloads are large and already primitives
    return Response(content=json.dumps(payload), status_code=status_code,
                    media_type="application/json")


def create_app(config: Config | None = None) -> FastAPI:
    config = config or load_config()
    state = AppState(config)
    app = FastAPI(title="tracemap", docs_url=None, redoc_url=None)
    app.state.tracemap = state

    origins = config.server.get("cors_origins", ["*"])
    app.add_middleware(
        CORSMiddleware, allow_origins=origins, allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(TracemapError)
    async def tracemap_error(_request: Request, exc: TracemapError):
        status = _STATUS_BY_CODE.get(exc.code, 500)
        body = {"code": exc.code, "message": str(exc)}
        detail = getattr(exc, "detail", None)
        if detail:
            body["detail"] = detail
        record_index = getattr(exc, "record_index", None)
        if record_index is not None:
            body["record_index"] = record_index
        return JSONResponse(status_code=status, content=body)

    # -- datasets -----------------------------------------------------------

    @app.get("/datasets")
    def list_datasets():
        out = []
        for dataset_id in store.list_dataset_ids(state.data_root):
            path = os.path.join(store.dataset_dir(state.data_root, dataset_id),
                                store.MANIFEST_FILE)
            with open(path, encoding="utf-8") as fh:
                out.append(json.load(fh))
        return _json({"datasets": out})

    @app.get("/datasets/{dataset_id}")
    def get_manifest(dataset_id: str):
        view = state.get_view(dataset_id)
        return _json(view.dataset.manifest.to_json_obj())

    @app.post("/datasets")
    def create_dataset(
        file: UploadFile = File(...),
        platform: str | None = Form(None),
        name: str = Form(""),
        transcripts: UploadFile | None = File(None),
    ):
        raw = file.file.read()
        sidecar = transcripts.file.read() if transcripts is not None else None
        job = BuildJob(job_id=uuid.uuid4().hex[:12])
        with state.jobs_lock:
            state.jobs[job.job_id] = job

        def run():
            try:
                dataset = store.build_dataset(
                    [(platform, raw)], state.config, name=name,
                    transcripts=sidecar, progress=job.advance,
                )
                view = store.DatasetView(dataset)
                with state.views_lock:
                    state.views[dataset.manifest.dataset_id] = view
                job.finish(dataset.manifest.dataset_id)
            except TracemapError as exc:
                job.fail(getattr(exc, "stage", "internal"), str(exc))
            except Exception as exc:  # build thread must never die silently
                log.exception("build job %s crashed", job.job_id)
                job.fail("internal", str(exc))

        state.builder.submit(run)
        return _json({"job_id": job.job_id, "status": job.status}, status_code=202)

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        with state.jobs_lock:
            job = state.jobs.get(job_id)
        if job is None:
            raise UnknownJob(f"no build job {job_id!r}")
        return _json(job.to_json_obj())

    # -- queries ------------------------------------------------------------

    @app.get("/datasets/{dataset_id}/points")
    def get_points(dataset_id: str, bbox: str | None = None,
                   from_: str | None = Query(None, alias="from"),
                   to: str | None = None):
        view = state.get_view(dataset_id)
        box = parse_bbox(bbox)
        window = parse_window(from_, to, view)
        rows = view.visible_rows(box, window)
        events = view.events
        positions = view.positions
        points = [
            {
                "event_id": events[i].event_id,
                "x": float(positions[i, 0]),
                "y": float(positions[i, 1]),
                "kind": events[i].kind.value,
                "platform": events[i].platform.value,
            }
            for i in (int(r) for r in rows)
        ]
        return _json({"dataset_id": dataset_id, "count": len(points),
                      "points": points})

    @app.get("/datasets/{dataset_id}/labels")
    def get_labels(dataset_id: str, bbox: str | None = None, zoom: int = 0,
                   from_: str | None = Query(None, alias="from"),
                   to: str | None = None):
        view = state.get_view(dataset_id)
        box = parse_bbox(bbox) or view.full_extent()
        window = parse_window(from_, to, view)
        placements = view.labels_for(box, zoom, window)
        return _json({
            "dataset_id": dataset_id,
            "zoom": zoom,
            "labels": [
                {
                    "label": p.label,
                    "rank": p.rank,
                    "zoom_min": p.zoom_min,
                    "anchor": [p.anchor[0], p.anchor[1]],
                    "box": list(p.box),
                }
                for p in placements
            ],
        })

    @app.get("/datasets/{dataset_id}/contours")
    def get_contours(dataset_id: str,
                     from_: str | None = Query(None, alias="from"),
                     to: str | None = None, levels: str | None = None):
        view = state.get_view(dataset_id)
        window = parse_window(from_, to, view)
        level_list = None
        if levels:
            try:
                level_list = [float(p) for p in levels.split(",")]
            except ValueError:
                raise BadRequest(f"levels must be comma-separated numbers: {levels!r}")
            if any(b <= a for a, b in zip(level_list, level_list[1:])):
                raise BadRequest("levels must be strictly increasing")
        used_levels, per_level = view.contours_for(window, level_list)
        return _json({
            "dataset_id": dataset_id,
            "levels": [float(lv) for lv in used_levels],
            "contours": [
                [[[float(x), float(y)] for x, y in line] for line in lines]
                for lines in per_level
            ],
        })

    @app.get("/datasets/{dataset_id}/points/{event_id}")
    def get_point_detail(dataset_id: str, event_id: str):
        view = state.get_view(dataset_id)
        return _json(view.point_detail(event_id))

    @app.get("/datasets/{dataset_id}/summary")
    def get_summary(dataset_id: str, bbox: str | None = None,
                    from_: str | None = Query(None, alias="from"),
                    to: str | None = None, seed: int = 0):
        view = state.get_view(dataset_id)
        box = parse_bbox(bbox)
        window = parse_window(from_, to, view)
        sample_size = int(state.config.map.get("sample_size", 40))
        text = view.summary_for(box, window, seed, sample_size,
                                provider=state.summary_provider)
        return _json({"dataset_id": dataset_id, "summary": text, "seed": seed})

    @app.get("/datasets/{dataset_id}/frames")
    def get_frames(dataset_id: str, step: str = "month"):
        view = state.get_view(dataset_id)
        if step != "month":
            raise BadRequest(f"unsupported frame step {step!r}")
        frames = view.frames(step)
        return _json({
            "dataset_id": dataset_id,
            "step": step,
            "count": len(frames),
            "frames": [
                {"start": format_instant(w.start), "end": format_instant(w.end)}
                for w in frames
            ],
        })

    # -- overlays -----------------------------------------------------------

    @app.post("/overlays")
    def create_overlay(body: dict):
        target_id = body.get("target_id")
        other_id = body.get("other_id")
        if not target_id or not other_id:
            raise BadRequest("overlay request needs target_id and other_id")
        target = state.get_view(target_id).dataset
        other = state.get_view(other_id).dataset
        overlay = store.overlay_datasets(target, other)
        store.persist_overlay(overlay, state.data_root)
        with state.overlays_lock:
            state.overlays[overlay.overlay_id] = overlay
        return _json({
            "overlay_id": overlay.overlay_id,
            "target_id": overlay.target_id,
            "other_id": overlay.other_id,
            "count": len(overlay.event_ids),
        }, status_code=201)

    @app.get("/overlays/{overlay_id}/points")
    def get_overlay_points(overlay_id: str, bbox: str | None = None):
        overlay = state.get_overlay(overlay_id)
        box = parse_bbox(bbox)
        pos = overlay.positions
        if box is None:
            keep = np.arange(pos.shape[0])
        else:
            keep = np.nonzero(
                (pos[:, 0] >= box.minx) & (pos[:, 0] <= box.maxx)
                & (pos[:, 1] >= box.miny) & (pos[:, 1] <= box.maxy)
            )[0]
        return _json({
            "overlay_id": overlay_id,
            "target_id": overlay.target_id,
            "other_id": overlay.other_id,
            "count": int(keep.size),
            "points": [
                {
                    "event_id": overlay.event_ids[i],
                    "kind": overlay.kinds[i],
                    "platform": overlay.platforms[i],
                    "source": overlay.other_id,
                    "x": float(pos[i, 0]),
                    "y": float(pos[i, 1]),
                }
                for i in (int(k) for k in keep)
            ],
        })

    return app


def run_server(config: Config | None = None, host: str | None = None,
               port: int | None = None) -> None:
    """Blocking entry point used by the CLI's serve subcommand."""
    import uvicorn

    config = config or load_config()
    app = create_app(config)
    uvicorn.run(
        app,
        host=host or config.server.get("host", "127.0.0.1"),
        port=port or int(config.server.get("port", 8765)),
        log_level=config.log_level.lower(),
    )
