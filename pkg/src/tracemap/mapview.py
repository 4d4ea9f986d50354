"""Visual-analytic layer over a fitted layout.

Density grids with contour extraction, occlusion-aware label placement,
timeline filtering and cumulative monthly animation frames, seeded viewport
summaries, and a uniform-grid spatial index for bbox queries. Everything
operates on immutable built artifacts and is safe to call concurrently.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, NamedTuple

import numpy as np
from scipy.ndimage import gaussian_filter

from .errors import BadBBox, BadWindow, ProviderUnavailable
from .events import FootprintEvent
from .topics import (
    MAX_TOPICS_PER_ITEM,
    TopicAssignment,
    TopicNode,
    TopicTree,
    aggregate_rank,
)

log = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 256
KERNEL_TRUNCATE = 4.0
DEFAULT_FONT_SIZE = 0.5
LABEL_WIDTH_PER_CHAR = 0.62
LABEL_HEIGHT_FACTOR = 1.2
DEFAULT_SAMPLE_SIZE = 40


class Bbox(NamedTuple):
    minx: float
    miny: float
    maxx: float
    maxy: float

    def validate(self) -> "Bbox":
        vals = [self.minx, self.miny, self.maxx, self.maxy]
        if not all(math.isfinite(v) for v in vals):
            raise BadBBox("bbox coordinates must be finite")
        if self.minx > self.maxx or self.miny > self.maxy:
            raise BadBBox("bbox min must not exceed max")
        return self

    def contains(self, x: float, y: float) -> bool:
        return self.minx <= x <= self.maxx and self.miny <= y <= self.maxy


@dataclass
class TimeWindow:
    """Half-open UTC interval [start, end)."""

    start: datetime
    end: datetime

    def __post_init__(self):
        if self.start.tzinfo is None or self.end.tzinfo is None:
            raise BadWindow("window bounds must be timezone-aware")
        if not self.start < self.end:
            raise BadWindow("window start must precede end")

    def contains(self, ts: datetime) -> bool:
        return self.start <= ts < self.end


# ---------------------------------------------------------------------------
# density


@dataclass
class DensityGrid:
    """Gaussian kernel density on a regular grid over the layout extent.

    ``values[iy, ix]`` is the density at the cell center; integrating
    (sum * cell area) recovers the point count up to kernel truncation.
    """

    values: np.ndarray
    x0: float
    y0: float
    cell_w: float
    cell_h: float
    bandwidth: float
    n_points: int

    @property
    def resolution(self) -> int:
        return self.values.shape[0]

    @property
    def cell_area(self) -> float:
        return self.cell_w * self.cell_h

    def total_mass(self) -> float:
        return float(self.values.sum() * self.cell_area)

    def max_value(self) -> float:
        return float(self.values.max())

    def x_centers(self) -> np.ndarray:
        nx = self.values.shape[1]
        return self.x0 + (np.arange(nx) + 0.5) * self.cell_w

    def y_centers(self) -> np.ndarray:
        ny = self.values.shape[0]
        return self.y0 + (np.arange(ny) + 0.5) * self.cell_h


def scott_bandwidth(positions: np.ndarray) -> float:
    """Scott's rule for 2D data; 1.0 when the spread is degenerate."""
    pts = np.asarray(positions, dtype=np.float64)
    n = pts.shape[0]
    if n < 2:
        return 1.0
    spread = math.sqrt((pts[:, 0].var() + pts[:, 1].var()) / 2.0)
    if spread <= 0 or not math.isfinite(spread):
        return 1.0
    return float(n ** (-1.0 / 6.0) * spread)


def kde_density(positions, bandwidth: float | None = None,
                resolution: int = DEFAULT_RESOLUTION) -> DensityGrid:
    """Truncated-Gaussian kernel density estimate over the layout.

    Points are binned at the grid resolution and the histogram is smoothed
    with a Gaussian of ``bandwidth`` (layout units), truncated at 4
    bandwidths. The extent pads the point bbox by max(5% of span, one
    truncation radius) per axis so kernels near the hull keep their mass
    on the grid.
    """
    pts = np.asarray(positions, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 1:
        raise ValueError("positions must be a non-empty (n, 2) array")
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    h = scott_bandwidth(pts) if bandwidth is None else float(bandwidth)
    if h <= 0:
        raise ValueError("bandwidth must be > 0")

    minx, miny = pts.min(axis=0)
    maxx, maxy = pts.max(axis=0)
    pad_x = max(0.05 * (maxx - minx), KERNEL_TRUNCATE * h)
    pad_y = max(0.05 * (maxy - miny), KERNEL_TRUNCATE * h)
    gx0, gx1 = minx - pad_x, maxx + pad_x
    gy0, gy1 = miny - pad_y, maxy + pad_y

    counts, _, _ = np.histogram2d(
        pts[:, 0], pts[:, 1], bins=resolution,
        range=[[gx0, gx1], [gy0, gy1]],
    )
    counts = counts.T  # histogram2d is [xbin, ybin]; grid is [iy, ix]
    cell_w = (gx1 - gx0) / resolution
    cell_h = (gy1 - gy0) / resolution
    smooth = gaussian_filter(
        counts, sigma=(h / cell_h, h / cell_w),
        truncate=KERNEL_TRUNCATE, mode="constant",
    )
    values = smooth / (cell_w * cell_h)
    return DensityGrid(
        values=values, x0=gx0, y0=gy0, cell_w=cell_w, cell_h=cell_h,
        bandwidth=h, n_points=pts.shape[0],
    )


def default_levels(grid: DensityGrid, count: int = 5) -> list[float]:
    """Quantile-spaced contour levels over the positive cells."""
    positive = grid.values[grid.values > 0]
    if positive.size == 0:
        return []
    qs = [(i + 1) / (count + 1) for i in range(count)]
    levels = np.quantile(positive, qs)
    out: list[float] = []
    for lv in levels:
        if not out or lv > out[-1]:
            out.append(float(lv))
    return out


# ---------------------------------------------------------------------------
# contours (marching squares on the cell-center lattice)

# edge key: ("h", iy, ix) joins nodes (iy,ix)-(iy,ix+1);
#           ("v", iy, ix) joins nodes (iy,ix)-(iy+1,ix)
_EdgeKey = tuple[str, int, int]


def _square_segments(case: int, center_inside: bool,
                     left: _EdgeKey, right: _EdgeKey,
                     bottom: _EdgeKey, top: _EdgeKey) -> list[tuple[_EdgeKey, _EdgeKey]]:
    if case in (0, 15):
        return []
    if case in (1, 14):
        return [(left, bottom)]
    if case in (2, 13):
        return [(bottom, right)]
    if case in (3, 12):
        return [(left, right)]
    if case in (4, 11):
        return [(right, top)]
    if case in (6, 9):
        return [(bottom, top)]
    if case in (7, 8):
        return [(left, top)]
    if case == 5:
        # inside corners on the main diagonal; center decides the pairing
        if center_inside:
            return [(bottom, right), (left, top)]
        return [(left, bottom), (right, top)]
    # case 10: inside corners on the anti-diagonal
    if center_inside:
        return [(left, bottom), (right, top)]
    return [(bottom, right), (left, top)]


def _contour_level(values: np.ndarray, xs: np.ndarray, ys: np.ndarray,
                   level: float) -> list[np.ndarray]:
    inside = values > level
    if not inside.any():
        return []

    vertex: dict[_EdgeKey, tuple[float, float]] = {}

    def edge_vertex(key: _EdgeKey) -> tuple[float, float]:
        got = vertex.get(key)
        if got is not None:
            return got
        axis, iy, ix = key
        v1 = values[iy, ix]
        if axis == "h":
            v2 = values[iy, ix + 1]
            t = (level - v1) / (v2 - v1)
            pt = (xs[ix] + t * (xs[ix + 1] - xs[ix]), ys[iy])
        else:
            v2 = values[iy + 1, ix]
            t = (level - v1) / (v2 - v1)
            pt = (xs[ix], ys[iy] + t * (ys[iy + 1] - ys[iy]))
        vertex[key] = pt
        return pt

    # crossing cells are a thin band around each isoline, so find them with
    # one vectorized pass instead of visiting every cell
    cases = (inside[:-1, :-1] * 1 + inside[:-1, 1:] * 2
             + inside[1:, 1:] * 4 + inside[1:, :-1] * 8)
    crossing_iy, crossing_ix = np.nonzero((cases != 0) & (cases != 15))

    segments: list[tuple[_EdgeKey, _EdgeKey]] = []
    for iy, ix in zip(crossing_iy.tolist(), crossing_ix.tolist()):
        case = int(cases[iy, ix])
        center = (values[iy, ix] + values[iy, ix + 1]
                  + values[iy + 1, ix] + values[iy + 1, ix + 1]) / 4.0
        segs = _square_segments(
            case, center > level,
            left=("v", iy, ix), right=("v", iy, ix + 1),
            bottom=("h", iy, ix), top=("h", iy + 1, ix),
        )
        segments.extend(segs)

    # chain segments into polylines by shared lattice edges
    adjacency: dict[_EdgeKey, list[int]] = {}
    for si, (a, b) in enumerate(segments):
        adjacency.setdefault(a, []).append(si)
        adjacency.setdefault(b, []).append(si)

    used = [False] * len(segments)

    def walk(start: _EdgeKey) -> list[_EdgeKey]:
        chain = [start]
        node = start
        while True:
            nxt = None
            for si in adjacency[node]:
                if not used[si]:
                    used[si] = True
                    a, b = segments[si]
                    nxt = b if a == node else a
                    break
            if nxt is None:
                return chain
            chain.append(nxt)
            node = nxt

    polylines: list[np.ndarray] = []
    open_starts = sorted(k for k, sis in adjacency.items() if len(sis) == 1)
    for start in open_starts:
        if all(used[si] for si in adjacency[start]):
            continue
        chain = walk(start)
        polylines.append(np.array([edge_vertex(k) for k in chain]))
    for start in sorted(adjacency):
        if all(used[si] for si in adjacency[start]):
            continue
        chain = walk(start)  # cycles return to their start, closing the ring
        polylines.append(np.array([edge_vertex(k) for k in chain]))
    return polylines


def contours(grid: DensityGrid, levels: Iterable[float]) -> list[list[np.ndarray]]:
    """Marching-squares isolines at each level.

    Returns one list of polylines per level; closed curves repeat their
    first vertex at the end. Vertices lie on lattice edges with the value
    linearly interpolated to the level. Levels above the grid maximum give
    empty lists.
    """
    level_list = [float(lv) for lv in levels]
    for prev, cur in zip(level_list, level_list[1:]):
        if cur <= prev:
            raise ValueError("levels must be strictly increasing")
    xs = grid.x_centers()
    ys = grid.y_centers()
    return [_contour_level(grid.values, xs, ys, lv) for lv in level_list]


# ---------------------------------------------------------------------------
# labels


@dataclass
class LabelPlacement:
    """An accepted label: anchor plus the estimated box in layout units."""

    label: str
    rank: int
    zoom_min: int
    anchor: tuple[float, float]
    box: tuple[float, float, float, float]


def label_box(node: TopicNode, zoom: int,
              font_size: float = DEFAULT_FONT_SIZE) -> tuple[float, float, float, float]:
    """Estimated label extent, centered on the anchor.

    Character-count metric; shrinks with zoom because screen-fixed text
    covers less of the layout the deeper you go.
    """
    scale = font_size * 2.0 ** (-zoom)
    w = LABEL_WIDTH_PER_CHAR * scale * len(node.label)
    h = LABEL_HEIGHT_FACTOR * scale
    ax, ay = node.anchor
    return (ax - w / 2, ay - h / 2, ax + w / 2, ay + h / 2)


def boxes_intersect(a: tuple[float, float, float, float],
                    b: tuple[float, float, float, float]) -> bool:
    # touching edges do not count as an intersection
    return a[0] < b[2] and b[0] < a[2] and a[1] < b[3] and b[1] < a[3]


def place_labels(tree: TopicTree, viewport: Bbox, zoom: int,
                 font_size: float = DEFAULT_FONT_SIZE,
                 visible_ids: set[str] | None = None) -> list[LabelPlacement]:
    """Greedy occlusion-aware label selection.

    Candidates are tree nodes admitted at this zoom whose anchor lies in
    the viewport, tried in priority order (rank ascending); a candidate is
    accepted only if its box overlaps no accepted box. ``visible_ids``
    restricts candidates to topics with at least one member in the set
    (timeline filtering); ranks and anchors stay as built.
    """
    if zoom < 0:
        raise ValueError("zoom must be >= 0")
    viewport.validate()
    candidates = [
        n for n in tree.nodes()
        if n.zoom_min <= zoom and viewport.contains(n.anchor[0], n.anchor[1])
        and (visible_ids is None
             or any(m in visible_ids for m in n.member_event_ids))
    ]
    candidates.sort(key=lambda n: (n.rank, n.normalized))
    placed: list[LabelPlacement] = []
    for node in candidates:
        box = label_box(node, zoom, font_size)
        if any(boxes_intersect(box, p.box) for p in placed):
            continue
        placed.append(LabelPlacement(
            label=node.label, rank=node.rank, zoom_min=node.zoom_min,
            anchor=node.anchor, box=box,
        ))
    return placed


# ---------------------------------------------------------------------------
# timeline


def filter_by_time(events: list[FootprintEvent],
                   window: TimeWindow) -> list[FootprintEvent]:
    """Exactly the events with start <= timestamp < end, order preserved."""
    return [e for e in events if window.contains(e.timestamp)]


def month_floor(ts: datetime) -> datetime:
    return ts.astimezone(timezone.utc).replace(
        day=1, hour=0, minute=0, second=0, microsecond=0
    )


def add_months(ts: datetime, months: int) -> datetime:
    total = ts.year * 12 + (ts.month - 1) + months
    return ts.replace(year=total // 12, month=total % 12 + 1)


def animation_frames(events: list[FootprintEvent], step: str = "month",
                     start: datetime | None = None) -> list[TimeWindow]:
    """Cumulative monthly windows for the timeline's play mode.

    Frame i covers [start, start + i+1 months); frames accumulate until
    the last event is covered, so frame k's events nest inside frame k+1's.
    Default start is the first event's month.
    """
    if step != "month":
        raise ValueError(f"unsupported animation step {step!r}")
    if not events:
        raise ValueError("animation_frames requires a non-empty dataset")
    first = min(e.timestamp for e in events)
    last = max(e.timestamp for e in events)
    origin = month_floor(first if start is None else start)
    frames: list[TimeWindow] = []
    i = 1
    while True:
        end = add_months(origin, i)
        frames.append(TimeWindow(origin, end))
        if end > last:
            return frames
        i += 1


# ---------------------------------------------------------------------------
# summaries


class StubSummaryProvider:
    """Formats the deterministic fallback summary; no network."""

    provider_id = "stub-summary"

    def summarize(self, payloads: list[str]) -> str:
        raise ProviderUnavailable("stub provider has no free-text model")


class RemoteSummaryProvider:
    """HTTP summary provider: POST {"texts": [...]} -> {"summary": "..."}."""

    def __init__(self, endpoint: str, auth_token: str | None = None,
                 timeout: float = 30.0):
        self.endpoint = endpoint
        self.auth_token = auth_token
        self.timeout = timeout
        self.provider_id = f"remote-summary:{endpoint}"

    def summarize(self, payloads: list[str]) -> str:
        import requests

        headers = {"Content-Type": "application/json"}
        if self.auth_token:
            headers["Authorization"] = f"Bearer {self.auth_token}"
        try:
            resp = requests.post(self.endpoint, json={"texts": payloads},
                                 headers=headers, timeout=self.timeout)
        except requests.RequestException as exc:
            raise ProviderUnavailable(f"summary endpoint unreachable: {exc}")
        if resp.status_code != 200:
            raise ProviderUnavailable(f"summary endpoint returned {resp.status_code}")
        body = resp.json()
        if "summary" not in body:
            raise ProviderUnavailable("summary response missing 'summary'")
        return str(body["summary"])


def _stub_summary(n_visible: int, sample_assignments: list[TopicAssignment]) -> str:
    ranked = aggregate_rank(sample_assignments)
    top = [t.label for t in ranked[:MAX_TOPICS_PER_ITEM]]
    topics = ", ".join(top) if top else "(none)"
    return f"{n_visible} items; top topics: {topics}"


def sample_events(events: list[FootprintEvent], sample_size: int,
                  seed: int) -> list[FootprintEvent]:
    """Seeded uniform sample without replacement, in stable input order."""
    if sample_size < 1:
        raise ValueError("sample_size must be >= 1")
    n = len(events)
    take = min(sample_size, n)
    if take == 0:
        return []
    rng = np.random.default_rng(seed)
    chosen = rng.choice(n, size=take, replace=False)
    return [events[i] for i in sorted(chosen)]


def summarize_viewport(
    events: list[FootprintEvent],
    assignments_by_id: dict[str, TopicAssignment],
    sample_size: int = DEFAULT_SAMPLE_SIZE,
    provider=None,
    seed: int = 0,
) -> str:
    """Summarize the visible events from a seeded sample.

    With a capable provider the sampled payloads are sent out for a prose
    summary; on provider failure (or no provider) the deterministic stub
    format "N items; top topics: ..." is returned instead of an error.
    """
    sample = sample_events(events, sample_size, seed)
    if provider is not None and sample:
        try:
            return provider.summarize([e.text_payload for e in sample])
        except ProviderUnavailable as exc:
            log.warning("summary provider failed, using stub: %s", exc)
    assignments = [
        assignments_by_id.get(e.event_id, TopicAssignment(e.event_id, []))
        for e in sample
    ]
    return _stub_summary(len(events), assignments)


# ---------------------------------------------------------------------------
# spatial index


class SpatialIndex:
    """Uniform-grid index over 2D positions for bbox queries.

    Queries return indices sorted ascending and are set-equal to a linear
    scan with inclusive bounds on all four edges.
    """

    def __init__(self, positions, target_per_cell: int = 64):
        pts = np.asarray(positions, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ValueError("positions must be an (n, 2) array")
        self.positions = pts
        n = pts.shape[0]
        self.n = n
        if n == 0:
            self.ncells = 1
            self.x0 = self.y0 = 0.0
            self.cell_w = self.cell_h = 1.0
            self.buckets: dict[tuple[int, int], np.ndarray] = {}
            return
        self.ncells = max(1, int(math.sqrt(n / target_per_cell)))
        minx, miny = pts.min(axis=0)
        maxx, maxy = pts.max(axis=0)
        self.x0, self.y0 = float(minx), float(miny)
        span_x = max(float(maxx - minx), 1e-9)
        span_y = max(float(maxy - miny), 1e-9)
        self.cell_w = span_x / self.ncells
        self.cell_h = span_y / self.ncells
        cx = np.clip((pts[:, 0] - self.x0) / self.cell_w, 0, self.ncells - 1).astype(np.int64)
        cy = np.clip((pts[:, 1] - self.y0) / self.cell_h, 0, self.ncells - 1).astype(np.int64)
        order = np.lexsort((np.arange(n), cy, cx))
        keys = cx[order] * self.ncells + cy[order]
        self.buckets = {}
        for key, start, stop in zip(*_runs(keys)):
            cell = (int(key // self.ncells), int(key % self.ncells))
            self.buckets[cell] = order[start:stop]

    def _cell_range(self, lo: float, hi: float, origin: float, size: float) -> range:
        c0 = int(np.clip(math.floor((lo - origin) / size), 0, self.ncells - 1))
        c1 = int(np.clip(math.floor((hi - origin) / size), 0, self.ncells - 1))
        return range(c0, c1 + 1)

    def query(self, bbox: Bbox) -> np.ndarray:
        bbox.validate()
        if self.n == 0:
            return np.zeros(0, dtype=np.int64)
        candidates: list[np.ndarray] = []
        for cx in self._cell_range(bbox.minx, bbox.maxx, self.x0, self.cell_w):
            for cy in self._cell_range(bbox.miny, bbox.maxy, self.y0, self.cell_h):
                got = self.buckets.get((cx, cy))
                if got is not None:
                    candidates.append(got)
        if not candidates:
            return np.zeros(0, dtype=np.int64)
        idx = np.concatenate(candidates)
        pts = self.positions[idx]
        keep = (
            (pts[:, 0] >= bbox.minx) & (pts[:, 0] <= bbox.maxx)
            & (pts[:, 1] >= bbox.miny) & (pts[:, 1] <= bbox.maxy)
        )
        return np.sort(idx[keep])


def _runs(sorted_keys: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Run-length boundaries of a sorted key array: (keys, starts, stops)."""
    if sorted_keys.size == 0:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty
    change = np.nonzero(np.diff(sorted_keys))[0] + 1
    starts = np.concatenate([[0], change])
    stops = np.concatenate([change, [sorted_keys.size]])
    return sorted_keys[starts], starts, stops
