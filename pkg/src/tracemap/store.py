"""Dataset persistence and build orchestration.

A built dataset lives in one directory: manifest, events, vectors, reducer
model, topic assignments and tree, density grid. Everything is inspectable
(JSON or npy/npz), versioned, and content-addressed by a hash of the raw
export plus the build configuration, so rebuilding the same inputs lands in
the same place and embedding caches stay sound.

Builds assemble the whole dataset in memory and persist only on success;
a failed stage leaves no artifacts behind.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import shutil
import threading
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from typing import Callable

import numpy as np
import scipy.sparse

from . import ingest
from .config import Config
from .embed import EmbeddingCache, EmbedStats, embed_texts, make_provider
from .errors import (
    BuildError,
    FormatVersionError,
    ProviderMismatch,
    TracemapError,
    UnknownDataset,
    UnknownPoint,
    UnsupportedFormat,
)
from .events import (
    FootprintEvent,
    Platform,
    format_instant,
    read_events_jsonl,
    write_events_jsonl,
)
from .mapview import (
    Bbox,
    DensityGrid,
    SpatialIndex,
    TimeWindow,
    animation_frames,
    contours,
    default_levels,
    filter_by_time,
    kde_density,
    place_labels,
    summarize_viewport,
)
from .reduce import FuzzyGraph, KnnGraph, LayoutParams, ReducerModel, fit_reducer, transform
from .topics import (
    RemoteTopicProvider,
    TfidfStubProvider,
    TopicAssignment,
    TopicTree,
    aggregate_rank,
    anchor_topics,
    build_topic_tree,
    extract_topics,
)

log = logging.getLogger(__name__)

FORMAT_VERSIONS = {
    "manifest": 1,
    "events": 1,
    "vectors": 1,
    "model": 1,
    "topics": 1,
    "topic_tree": 1,
    "density": 1,
    "overlay": 1,
}

MANIFEST_FILE = "manifest.json"
EVENTS_FILE = "events.jsonl"
VECTORS_FILE = "vectors.npy"
MODEL_DIR = "model"
TOPICS_FILE = "topics.json"
TREE_FILE = "topic_tree.json"
DENSITY_FILE = "density.npz"
OVERLAYS_DIR = "overlays"

YT_THUMBNAIL = "https://i.ytimg.com/vi/{item_id}/hqdefault.jpg"


def dataset_id_for(raw_basis: bytes, config: Config) -> str:
    h = hashlib.sha256()
    h.update(raw_basis)
    h.update(b"\x00")
    h.update(config.build_fingerprint().encode())
    return h.hexdigest()[:16]


@dataclass
class DatasetManifest:
    """Everything needed to identify and reproduce a built dataset."""

    dataset_id: str
    name: str
    platforms: list[str]
    event_count: int
    time_min: str | None
    time_max: str | None
    provider_id: str
    dim: int
    reducer: dict
    topic_provider: str
    topic_levels: int
    topic_l0_max: int
    density: dict
    built_at: str
    format_versions: dict

    def to_json_obj(self) -> dict:
        return dict(self.__dict__)

    @classmethod
    def from_json_obj(cls, obj: dict) -> "DatasetManifest":
        versions = obj.get("format_versions", {})
        for part, version in versions.items():
            known = FORMAT_VERSIONS.get(part)
            if known is None or version > known:
                raise FormatVersionError(
                    f"dataset component {part!r} has format version {version}, "
                    f"this build reads up to {known}"
                )
        return cls(**obj)


@dataclass
class MapDataset:
    """A fully built dataset: events, vectors, layout, topics, density."""

    manifest: DatasetManifest
    events: list[FootprintEvent]
    vectors: np.ndarray
    model: ReducerModel
    assignments: list[TopicAssignment]
    tree: TopicTree
    density: DensityGrid

    @property
    def positions(self) -> np.ndarray:
        return self.model.positions

    def validate(self) -> None:
        n = len(self.events)
        if not (self.vectors.shape[0] == n == self.positions.shape[0]
                == len(self.assignments) == self.manifest.event_count):
            raise FormatVersionError(
                f"inconsistent component counts in dataset {self.manifest.dataset_id}"
            )
        ids = {e.event_id for e in self.events}
        for a in self.assignments:
            if a.event_id not in ids:
                raise FormatVersionError(f"assignment for unknown event {a.event_id}")
        for node in self.tree.nodes():
            for m in node.member_event_ids:
                if m not in ids:
                    raise FormatVersionError(f"topic member {m} is not an event")


def _topic_provider(config: Config):
    name = config.topics.get("provider", "stub")
    if name == "stub":
        return TfidfStubProvider()
    if name == "remote":
        endpoint = config.topics.get("endpoint")
        if not endpoint:
            raise BuildError("labeling", "remote topic provider requires an endpoint")
        token = os.environ.get(config.topics.get("auth_env", "TRACEMAP_API_TOKEN"))
        return RemoteTopicProvider(endpoint, auth_token=token)
    raise BuildError("labeling", f"unknown topic provider {name!r}")


def _stage(name: str, progress: Callable[[str], None] | None):
    if progress is not None:
        progress(name)


def build_from_events(
    events: list[FootprintEvent],
    raw_basis: bytes,
    config: Config,
    name: str = "",
    progress: Callable[[str], None] | None = None,
    persist: bool = True,
) -> MapDataset:
    """Run embed -> reduce -> topics -> density over parsed events.

    ``raw_basis`` is the byte content the dataset id is hashed from (the
    original export, or the events file when building from one).
    """
    if not events:
        raise BuildError("ingest", "no events to build from")
    dataset_id = dataset_id_for(raw_basis, config)
    data_root = config.data_root

    _stage("embedding", progress)
    payloads = [e.text_payload for e in events]
    provider = make_provider(config.embedding)
    cache_path = os.path.join(data_root, "cache", "embeddings.sqlite")
    cache = EmbeddingCache(cache_path) if persist else None
    stats = EmbedStats()
    try:
        vectors = embed_texts(
            payloads, provider, cache=cache,
            batch_size=int(config.embedding.get("batch_size", 128)),
            parallelism=int(config.embedding.get("parallelism", 1)),
            stats=stats,
        )
    except TracemapError as exc:
        raise BuildError("embedding", str(exc)) from exc
    if stats.hits:
        log.info("embedding cache: %d hits, %d misses", stats.hits, stats.misses)

    _stage("reducing", progress)
    try:
        params = LayoutParams.from_dict(config.reducer)
        model = fit_reducer(vectors, params, provider_id=provider.provider_id)
    except TracemapError as exc:
        raise BuildError("reducing", str(exc)) from exc

    _stage("labeling", progress)
    try:
        topic_provider = _topic_provider(config)
        assignments = extract_topics(
            payloads, topic_provider, event_ids=[e.event_id for e in events]
        )
        ranked = aggregate_rank(assignments)
        pos_by_id = {
            e.event_id: (float(model.positions[i, 0]), float(model.positions[i, 1]))
            for i, e in enumerate(events)
        }
        ranked = anchor_topics(ranked, pos_by_id)
        tree = build_topic_tree(
            ranked, assignments,
            levels=int(config.topics.get("levels", 4)),
            l0_max=int(config.topics.get("l0_max", 12)),
        )
        density = kde_density(
            model.positions, bandwidth=None,
            resolution=int(config.map.get("resolution", 256)),
        )
    except TracemapError as exc:
        raise BuildError("labeling", str(exc)) from exc

    timestamps = [e.timestamp for e in events]
    manifest = DatasetManifest(
        dataset_id=dataset_id,
        name=name or dataset_id,
        platforms=sorted({e.platform.value for e in events}),
        event_count=len(events),
        time_min=format_instant(min(timestamps)),
        time_max=format_instant(max(timestamps)),
        provider_id=provider.provider_id,
        dim=int(vectors.shape[1]),
        reducer={**params.to_dict(), "curve_a": model.curve_a,
                 "curve_b": model.curve_b, "init": "pca"},
        topic_provider=getattr(topic_provider, "provider_id", "stub"),
        topic_levels=int(config.topics.get("levels", 4)),
        topic_l0_max=int(config.topics.get("l0_max", 12)),
        density={"bandwidth": density.bandwidth, "resolution": density.resolution,
                 "rule": "scott"},
        built_at=format_instant(datetime.now(timezone.utc)),
        format_versions=dict(FORMAT_VERSIONS),
    )
    dataset = MapDataset(
        manifest=manifest, events=events, vectors=vectors, model=model,
        assignments=assignments, tree=tree, density=density,
    )
    dataset.validate()
    if persist:
        persist_dataset(dataset, data_root)
    return dataset


def build_dataset(
    raw_exports,
    config: Config,
    name: str = "",
    transcripts: bytes | None = None,
    progress: Callable[[str], None] | None = None,
    persist: bool = True,
) -> MapDataset:
    """Full pipeline from raw export bytes.

    ``raw_exports`` is bytes for a single export or a list of
    (platform_hint, bytes) pairs; hints may be None for sniffing.
    Errors carry the failing stage (and record index when known).
    """
    if isinstance(raw_exports, (bytes, bytearray)):
        raw_exports = [(None, bytes(raw_exports))]

    _stage("ingesting", progress)
    basis = hashlib.sha256()
    events: list[FootprintEvent] = []
    sidecar = ingest.load_transcript_sidecar(transcripts) if transcripts else None
    window_minutes = float(config.map.get("after_search_window_minutes", 10))
    try:
        for hint, raw in raw_exports:
            if isinstance(hint, str):
                try:
                    hint = Platform(hint)
                except ValueError:
                    raise UnsupportedFormat(f"unknown platform hint {hint!r}")
            basis.update(raw)
            basis.update(b"\x00")
            events.extend(ingest.parse_export(
                raw, platform=hint, transcripts=sidecar,
                after_search_window=timedelta(minutes=window_minutes),
            ))
    except TracemapError as exc:
        raise BuildError(
            "ingest", str(exc), record_index=getattr(exc, "record_index", None)
        ) from exc
    if not events:
        raise BuildError("ingest", "export contained no usable events")
    events.sort(key=lambda e: (e.timestamp, e.event_id))
    return build_from_events(
        events, basis.digest(), config, name=name,
        progress=progress, persist=persist,
    )


# ---------------------------------------------------------------------------
# persistence


def dataset_dir(data_root: str, dataset_id: str) -> str:
    return os.path.join(data_root, dataset_id)


def persist_dataset(dataset: MapDataset, data_root: str) -> str:
    """Write all artifacts atomically under the dataset directory.

    Assembles into a temp directory and renames into place, guarded by an
    advisory lock so concurrent builds of the same id cannot interleave.
    """
    dataset_id = dataset.manifest.dataset_id
    os.makedirs(data_root, exist_ok=True)
    final = dataset_dir(data_root, dataset_id)
    lock_path = final + ".lock"
    tmp = final + ".tmp"
    try:
        lock_fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise BuildError(
            "store", f"another build holds the lock for dataset {dataset_id}"
        )
    try:
        if os.path.exists(tmp):
            shutil.rmtree(tmp)
        os.makedirs(os.path.join(tmp, MODEL_DIR))

        with open(os.path.join(tmp, MANIFEST_FILE), "w", encoding="utf-8") as fh:
            json.dump(dataset.manifest.to_json_obj(), fh, indent=2, sort_keys=True)
        with open(os.path.join(tmp, EVENTS_FILE), "w", encoding="utf-8") as fh:
            write_events_jsonl(dataset.events, fh)
        np.save(os.path.join(tmp, VECTORS_FILE), dataset.vectors)

        model = dataset.model
        with open(os.path.join(tmp, MODEL_DIR, "model.json"), "w", encoding="utf-8") as fh:
            json.dump({
                "version": FORMAT_VERSIONS["model"],
                "params": model.params.to_dict(),
                "curve_a": model.curve_a,
                "curve_b": model.curve_b,
                "provider_id": model.provider_id,
            }, fh, indent=2, sort_keys=True)
        np.save(os.path.join(tmp, MODEL_DIR, "positions.npy"), model.positions)
        graph_arrays = {
            "knn_indices": model.knn.indices,
            "knn_distances": model.knn.distances,
        }
        if model.fuzzy is not None:
            graph_arrays.update(
                fuzzy_data=model.fuzzy.graph.data,
                fuzzy_indices=model.fuzzy.graph.indices,
                fuzzy_indptr=model.fuzzy.graph.indptr,
                rho=model.fuzzy.rho,
                sigma=model.fuzzy.sigma,
            )
        np.savez(os.path.join(tmp, MODEL_DIR, "graph.npz"), **graph_arrays)

        with open(os.path.join(tmp, TOPICS_FILE), "w", encoding="utf-8") as fh:
            json.dump({
                "version": FORMAT_VERSIONS["topics"],
                "assignments": [a.to_json_obj() for a in dataset.assignments],
            }, fh, sort_keys=True)
        with open(os.path.join(tmp, TREE_FILE), "w", encoding="utf-8") as fh:
            json.dump({
                "version": FORMAT_VERSIONS["topic_tree"],
                "tree": dataset.tree.to_json_obj(),
            }, fh, sort_keys=True)

        d = dataset.density
        np.savez(
            os.path.join(tmp, DENSITY_FILE),
            values=d.values,
            meta=np.array([d.x0, d.y0, d.cell_w, d.cell_h, d.bandwidth,
                           float(d.n_points)]),
        )

        if os.path.exists(final):
            shutil.rmtree(final)
        os.replace(tmp, final)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    finally:
        os.close(lock_fd)
        os.unlink(lock_path)
    return final


def load_dataset(data_root: str, dataset_id: str) -> MapDataset:
    """Load a persisted dataset, checking format versions and counts."""
    root = dataset_dir(data_root, dataset_id)
    manifest_path = os.path.join(root, MANIFEST_FILE)
    if not os.path.isfile(manifest_path):
        raise UnknownDataset(f"no dataset {dataset_id!r} under {data_root}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = DatasetManifest.from_json_obj(json.load(fh))

    with open(os.path.join(root, EVENTS_FILE), encoding="utf-8") as fh:
        events = list(read_events_jsonl(fh))
    vectors = np.load(os.path.join(root, VECTORS_FILE))

    with open(os.path.join(root, MODEL_DIR, "model.json"), encoding="utf-8") as fh:
        model_meta = json.load(fh)
    if model_meta.get("version") != FORMAT_VERSIONS["model"]:
        raise FormatVersionError(
            f"model format version {model_meta.get('version')} is not supported"
        )
    positions = np.load(os.path.join(root, MODEL_DIR, "positions.npy"))
    graph = np.load(os.path.join(root, MODEL_DIR, "graph.npz"))
    params = LayoutParams.from_dict(model_meta["params"])
    knn = KnnGraph(
        indices=graph["knn_indices"], distances=graph["knn_distances"],
        metric=params.metric,
    )
    fuzzy = None
    if "fuzzy_data" in graph:
        n = positions.shape[0]
        fuzzy = FuzzyGraph(
            graph=scipy.sparse.csr_matrix(
                (graph["fuzzy_data"], graph["fuzzy_indices"], graph["fuzzy_indptr"]),
                shape=(n, n),
            ),
            rho=graph["rho"],
            sigma=graph["sigma"],
        )
    model = ReducerModel(
        vectors=vectors, knn=knn, fuzzy=fuzzy, positions=positions,
        params=params, curve_a=float(model_meta["curve_a"]),
        curve_b=float(model_meta["curve_b"]),
        provider_id=model_meta.get("provider_id", ""),
    )

    with open(os.path.join(root, TOPICS_FILE), encoding="utf-8") as fh:
        topics_doc = json.load(fh)
    if topics_doc.get("version") != FORMAT_VERSIONS["topics"]:
        raise FormatVersionError("topic assignments have an unsupported format version")
    assignments = [TopicAssignment.from_json_obj(a) for a in topics_doc["assignments"]]

    with open(os.path.join(root, TREE_FILE), encoding="utf-8") as fh:
        tree_doc = json.load(fh)
    if tree_doc.get("version") != FORMAT_VERSIONS["topic_tree"]:
        raise FormatVersionError("topic tree has an unsupported format version")
    tree = TopicTree.from_json_obj(tree_doc["tree"])

    dens = np.load(os.path.join(root, DENSITY_FILE))
    meta = dens["meta"]
    density = DensityGrid(
        values=dens["values"], x0=float(meta[0]), y0=float(meta[1]),
        cell_w=float(meta[2]), cell_h=float(meta[3]), bandwidth=float(meta[4]),
        n_points=int(meta[5]),
    )

    dataset = MapDataset(
        manifest=manifest, events=events, vectors=vectors, model=model,
        assignments=assignments, tree=tree, density=density,
    )
    dataset.validate()
    return dataset


def list_dataset_ids(data_root: str) -> list[str]:
    if not os.path.isdir(data_root):
        return []
    out = []
    for entry in sorted(os.listdir(data_root)):
        if os.path.isfile(os.path.join(data_root, entry, MANIFEST_FILE)):
            out.append(entry)
    return out


# ---------------------------------------------------------------------------
# queryable view


class DatasetView:
    """Read-side wrapper: spatial index, lookups, and memoized densities."""

    def __init__(self, dataset: MapDataset):
        self.dataset = dataset
        self.index = SpatialIndex(dataset.positions)
        self.row_of = {e.event_id: i for i, e in enumerate(dataset.events)}
        self.assignments_by_id = {a.event_id: a for a in dataset.assignments}
        self._density_cache: dict[tuple, DensityGrid] = {}
        self._contour_cache: dict[tuple, tuple] = {}
        self._cache_lock = threading.Lock()

    @property
    def events(self) -> list[FootprintEvent]:
        return self.dataset.events

    @property
    def positions(self) -> np.ndarray:
        return self.dataset.positions

    def full_extent(self) -> Bbox:
        pos = self.positions
        return Bbox(float(pos[:, 0].min()), float(pos[:, 1].min()),
                    float(pos[:, 0].max()), float(pos[:, 1].max()))

    def visible_rows(self, bbox: Bbox | None = None,
                     window: TimeWindow | None = None) -> np.ndarray:
        if bbox is not None:
            rows = self.index.query(bbox)
        else:
            rows = np.arange(len(self.events))
        if window is not None:
            keep = [
                i for i in rows
                if window.contains(self.events[int(i)].timestamp)
            ]
            rows = np.array(keep, dtype=np.int64)
        return rows

    def density_for(self, window: TimeWindow | None = None,
                    resolution: int | None = None) -> DensityGrid | None:
        """Density over the events in the window; None when empty.

        The grid for a (window, resolution) pair is computed once and
        memoized; concurrent readers share it.
        """
        resolution = resolution or self.dataset.density.resolution
        key = (
            None if window is None else (window.start, window.end),
            resolution,
        )
        with self._cache_lock:
            got = self._density_cache.get(key)
        if got is not None:
            return got
        if window is None and resolution == self.dataset.density.resolution:
            grid = self.dataset.density
        else:
            events = self.events if window is None else filter_by_time(self.events, window)
            if not events:
                return None
            rows = [self.row_of[e.event_id] for e in events]
            grid = kde_density(self.positions[rows], bandwidth=None,
                               resolution=resolution)
        with self._cache_lock:
            self._density_cache[key] = grid
        return grid

    def contours_for(self, window: TimeWindow | None = None,
                     levels: list[float] | None = None):
        grid = self.density_for(window)
        if grid is None:
            return [], []
        if levels is None:
            levels = default_levels(grid)
        key = (
            None if window is None else (window.start, window.end),
            tuple(levels),
        )
        with self._cache_lock:
            got = self._contour_cache.get(key)
        if got is not None:
            return got
        result = (levels, contours(grid, levels))
        with self._cache_lock:
            self._contour_cache[key] = result
        return result

    def labels_for(self, bbox: Bbox, zoom: int,
                   window: TimeWindow | None = None):
        visible = None
        if window is not None:
            visible = {e.event_id for e in filter_by_time(self.events, window)}
        return place_labels(self.dataset.tree, bbox, zoom, visible_ids=visible)

    def summary_for(self, bbox: Bbox | None, window: TimeWindow | None,
                    seed: int, sample_size: int = 40, provider=None) -> str:
        rows = self.visible_rows(bbox, window)
        visible = [self.events[int(i)] for i in rows]
        return summarize_viewport(
            visible, self.assignments_by_id, sample_size=sample_size,
            provider=provider, seed=seed,
        )

    def frames(self, step: str = "month") -> list[TimeWindow]:
        return animation_frames(self.events, step=step)

    def point_detail(self, event_id: str) -> dict:
        row = self.row_of.get(event_id)
        if row is None:
            raise UnknownPoint(f"no event {event_id!r} in this dataset")
        e = self.events[row]
        thumbnail = None
        if e.platform.value == "youtube" and e.item_id:
            thumbnail = YT_THUMBNAIL.format(item_id=e.item_id)
        x, y = self.positions[row]
        assignment = self.assignments_by_id.get(event_id)
        return {
            "event_id": e.event_id,
            "title": e.title,
            "url": e.url,
            "channel_or_artist": e.channel_or_artist,
            "kind": e.kind.value,
            "platform": e.platform.value,
            "timestamp": format_instant(e.timestamp),
            "text_payload": e.text_payload,
            "thumbnail_url": thumbnail,
            "position": [float(x), float(y)],
            "topics": list(assignment.topics) if assignment else [],
        }


# ---------------------------------------------------------------------------
# overlay


@dataclass
class OverlayResult:
    """Positions of one dataset's points inside another dataset's layout."""

    overlay_id: str
    target_id: str
    other_id: str
    event_ids: list[str]
    kinds: list[str]
    platforms: list[str]
    positions: np.ndarray

    def to_json_obj(self) -> dict:
        return {
            "version": FORMAT_VERSIONS["overlay"],
            "overlay_id": self.overlay_id,
            "target_id": self.target_id,
            "other_id": self.other_id,
            "points": [
                {
                    "event_id": eid,
                    "kind": kind,
                    "platform": platform,
                    "source": self.other_id,
                    "x": float(self.positions[i, 0]),
                    "y": float(self.positions[i, 1]),
                }
                for i, (eid, kind, platform) in enumerate(
                    zip(self.event_ids, self.kinds, self.platforms)
                )
            ],
        }


def overlay_id_for(target_id: str, other_id: str) -> str:
    return hashlib.sha256(f"{target_id}|{other_id}".encode()).hexdigest()[:12]


def overlay_datasets(target: MapDataset, other: MapDataset) -> OverlayResult:
    """Project ``other``'s vectors into ``target``'s fitted layout.

    Order matters: overlay(A, B) and overlay(B, A) give different
    geometries because each projection lives in its target's space. The
    inputs are not modified.
    """
    if (target.manifest.provider_id != other.manifest.provider_id
            or target.manifest.dim != other.manifest.dim):
        raise ProviderMismatch(
            "overlay requires both datasets built with the same embedding "
            f"provider and dim; target has ({target.manifest.provider_id}, "
            f"{target.manifest.dim}), other has ({other.manifest.provider_id}, "
            f"{other.manifest.dim})"
        )
    positions = transform(target.model, other.vectors)
    return OverlayResult(
        overlay_id=overlay_id_for(target.manifest.dataset_id,
                                  other.manifest.dataset_id),
        target_id=target.manifest.dataset_id,
        other_id=other.manifest.dataset_id,
        event_ids=[e.event_id for e in other.events],
        kinds=[e.kind.value for e in other.events],
        platforms=[e.platform.value for e in other.events],
        positions=positions,
    )


def persist_overlay(overlay: OverlayResult, data_root: str) -> str:
    out_dir = os.path.join(data_root, OVERLAYS_DIR)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"{overlay.overlay_id}.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(overlay.to_json_obj(), fh, sort_keys=True)
    return path


def load_overlay(data_root: str, overlay_id: str) -> OverlayResult:
    path = os.path.join(data_root, OVERLAYS_DIR, f"{overlay_id}.json")
    if not os.path.isfile(path):
        raise UnknownDataset(f"no overlay {overlay_id!r}")
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("version") != FORMAT_VERSIONS["overlay"]:
        raise FormatVersionError("overlay has an unsupported format version")
    points = doc["points"]
    return OverlayResult(
        overlay_id=doc["overlay_id"],
        target_id=doc["target_id"],
        other_id=doc["other_id"],
        event_ids=[p["event_id"] for p in points],
        kinds=[p["kind"] for p in points],
        platforms=[p["platform"] for p in points],
        positions=np.array([[p["x"], p["y"]] for p in points], dtype=np.float64)
        if points else np.zeros((0, 2)),
    )
