"""Command-line entry point for headless use and scripting.

Subcommands cover the whole pipeline: parse an export into normalized
events, build a map dataset, serve the HTTP API, project one dataset
into another, export a static artifact (JSON or SVG), and list the
animation frame windows. Every subcommand supports ``--json`` for
machine-readable output on stdout; diagnostics go to stderr.

Exit codes: 0 success, 1 usage error, 2 data error, 3 provider error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from xml.sax.saxutils import escape

import numpy as np

from . import store
from .config import Config, load_config
from .errors import ProviderMismatch, ProviderUnavailable, TracemapError
from .events import (
    KIND_STYLES,
    EventKind,
    format_instant,
    read_events_jsonl,
    write_events_jsonl,
)
from .ingest import load_transcript_sidecar, parse_export
from .mapview import place_labels

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_PROVIDER = 3

log = logging.getLogger(__name__)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad arguments; the contract here is exit 1
    def error(self, message: str):
        raise UsageError(message)


def _emit(json_mode: bool, human: str, payload: dict) -> None:
    if json_mode:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(human)


def _layout_hash(positions: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(positions).tobytes()).hexdigest()[:12]


def _exit_code_for(exc: TracemapError) -> int:
    """Provider trouble exits 3; any other domain error is a data error."""
    cur: BaseException | None = exc
    while cur is not None:
        if isinstance(cur, (ProviderUnavailable, ProviderMismatch)):
            return EXIT_PROVIDER
        cur = cur.__cause__
    return EXIT_DATA


# ---------------------------------------------------------------------------
# subcommands


def cmd_ingest(args, config: Config, json_mode: bool) -> int:
    with open(args.export, "rb") as fh:
        raw = fh.read()
    sidecar = None
    if args.transcripts:
        with open(args.transcripts, "rb") as fh:
            sidecar = load_transcript_sidecar(fh.read())
    events = parse_export(raw, platform=None, transcripts=sidecar)
    events.sort(key=lambda e: (e.timestamp, e.event_id))
    out_path = args.output or os.path.splitext(args.export)[0] + ".events.jsonl"
    with open(out_path, "w", encoding="utf-8") as fh:
        count = write_events_jsonl(events, fh)
    _emit(json_mode, f"wrote {count} events to {out_path}",
          {"events": count, "output": out_path})
    return EXIT_OK


def cmd_build(args, config: Config, json_mode: bool) -> int:
    if args.provider:
        config.embedding["provider"] = args.provider
    if args.seed is not None:
        config.reducer["seed"] = args.seed

    with open(args.events, "rb") as fh:
        basis = fh.read()
    dataset_id = store.dataset_id_for(basis, config)

    existing = os.path.join(store.dataset_dir(config.data_root, dataset_id),
                            store.MANIFEST_FILE)
    if os.path.isfile(existing):
        dataset = store.load_dataset(config.data_root, dataset_id)
        digest = _layout_hash(dataset.model.positions)
        _emit(json_mode,
              f"reused cache for dataset {dataset_id}; layout {digest}",
              {"dataset_id": dataset_id, "events": len(dataset.events),
               "layout_hash": digest, "reused": True})
        return EXIT_OK

    with open(args.events, encoding="utf-8") as fh:
        events = list(read_events_jsonl(fh))
    name = args.name or os.path.basename(args.events)
    progress = None
    if not json_mode:
        progress = lambda stage: print(f"stage: {stage}", file=sys.stderr)
    dataset = store.build_from_events(events, basis, config, name=name,
                                      progress=progress)
    digest = _layout_hash(dataset.model.positions)
    _emit(json_mode,
          f"built dataset {dataset.manifest.dataset_id} "
          f"({len(events)} events); layout {digest}",
          {"dataset_id": dataset.manifest.dataset_id, "events": len(events),
           "layout_hash": digest, "reused": False})
    return EXIT_OK


def cmd_serve(args, config: Config, json_mode: bool) -> int:
    from .server import run_server

    run_server(config, host=args.host, port=args.port)
    return EXIT_OK


def cmd_overlay(args, config: Config, json_mode: bool) -> int:
    target = store.load_dataset(config.data_root, args.target_id)
    other = store.load_dataset(config.data_root, args.other_id)
    overlay = store.overlay_datasets(target, other)
    path = store.persist_overlay(overlay, config.data_root)
    _emit(json_mode,
          f"overlay {overlay.overlay_id}: {len(overlay.event_ids)} points "
          f"from {args.other_id} in the layout of {args.target_id}",
          {"overlay_id": overlay.overlay_id, "target_id": overlay.target_id,
           "other_id": overlay.other_id, "points": len(overlay.event_ids),
           "output": path})
    return EXIT_OK


def cmd_export(args, config: Config, json_mode: bool) -> int:
    dataset = store.load_dataset(config.data_root, args.dataset_id)
    view = store.DatasetView(dataset)
    if args.format == "json":
        artifact = json.dumps(export_obj(view), sort_keys=True)
    else:
        artifact = render_svg(view)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(artifact)
        _emit(json_mode, f"wrote {args.format} export to {args.output}",
              {"dataset_id": args.dataset_id, "format": args.format,
               "output": args.output, "bytes": len(artifact)})
    else:
        print(artifact)
    return EXIT_OK


def cmd_frames(args, config: Config, json_mode: bool) -> int:
    dataset = store.load_dataset(config.data_root, args.dataset_id)
    view = store.DatasetView(dataset)
    frames = view.frames(args.step)
    if json_mode:
        print(json.dumps({
            "dataset_id": args.dataset_id,
            "step": args.step,
            "count": len(frames),
            "frames": [
                {"start": format_instant(w.start), "end": format_instant(w.end)}
                for w in frames
            ],
        }, sort_keys=True))
    else:
        for w in frames:
            print(f"{format_instant(w.start)} {format_instant(w.end)}")
        print(f"{len(frames)} frames", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------------------
# static exports


def export_obj(view: store.DatasetView) -> dict:
    """Self-contained JSON snapshot: manifest, points, contours, L0 labels."""
    events = view.events
    positions = view.positions
    levels, polylines = view.contours_for()
    placements = place_labels(view.dataset.tree, view.full_extent(), zoom=0)
    return {
        "manifest": view.dataset.manifest.to_json_obj(),
        "points": [
            {
                "event_id": e.event_id,
                "x": float(positions[i, 0]),
                "y": float(positions[i, 1]),
                "kind": e.kind.value,
                "platform": e.platform.value,
                "title": e.title,
                "timestamp": format_instant(e.timestamp),
            }
            for i, e in enumerate(events)
        ],
        "contours": {
            "levels": [float(lv) for lv in levels],
            "polylines": [
                [[[float(x), float(y)] for x, y in line] for line in lines]
                for lines in polylines
            ],
        },
        "labels": [
            {"label": p.label, "rank": p.rank, "anchor": list(p.anchor),
             "box": list(p.box)}
            for p in placements
        ],
    }


SVG_WIDTH = 1000


def render_svg(view: store.DatasetView) -> str:
    """Static picture of the map: contours, points by kind color, L0 labels.

    Layout y grows upward, SVG y grows downward, so y is flipped. The
    legend lists only the kinds present so a YouTube-only map does not
    advertise listening history.
    """
    extent = view.full_extent()
    span_x = max(extent.maxx - extent.minx, 1e-9)
    span_y = max(extent.maxy - extent.miny, 1e-9)
    pad = 0.05
    width = SVG_WIDTH
    height = max(int(round(width * span_y / span_x)), 100)
    sx = width / (span_x * (1 + 2 * pad))
    sy = height / (span_y * (1 + 2 * pad))
    x0 = extent.minx - span_x * pad
    y1 = extent.maxy + span_y * pad

    def px(x: float) -> float:
        return round((x - x0) * sx, 2)

    def py(y: float) -> float:
        return round((y1 - y) * sy, 2)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
    ]

    _, polylines = view.contours_for()
    for lines in polylines:
        for line in lines:
            points = " ".join(f"{px(x)},{py(y)}" for x, y in line)
            parts.append(
                f'<polyline points="{points}" fill="none" '
                f'stroke="#94a3b8" stroke-width="1" opacity="0.7"/>'
            )

    events = view.events
    positions = view.positions
    for i, e in enumerate(events):
        color = KIND_STYLES[e.kind].color_hex
        parts.append(
            f'<circle cx="{px(float(positions[i, 0]))}" '
            f'cy="{py(float(positions[i, 1]))}" r="2.5" '
            f'fill="{color}" fill-opacity="0.75"/>'
        )

    for p in place_labels(view.dataset.tree, extent, zoom=0):
        parts.append(
            f'<text x="{px(p.anchor[0])}" y="{py(p.anchor[1])}" '
            f'font-family="sans-serif" font-size="14" font-weight="600" '
            f'fill="#1e293b" text-anchor="middle">{escape(p.label)}</text>'
        )

    present = sorted({e.kind for e in events}, key=lambda k: k.value)
    parts.append(_legend(present))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _legend(kinds: list[EventKind]) -> str:
    rows = ['<g font-family="sans-serif" font-size="12">']
    rows.append(
        f'<rect x="8" y="8" width="170" height="{14 + 18 * len(kinds)}" '
        f'fill="#ffffff" fill-opacity="0.85" stroke="#cbd5e1"/>'
    )
    for i, kind in enumerate(kinds):
        cy = 24 + 18 * i
        style = KIND_STYLES[kind]
        rows.append(f'<circle cx="20" cy="{cy}" r="5" fill="{style.color_hex}"/>')
        rows.append(
            f'<text x="32" y="{cy + 4}" fill="#1e293b">'
            f'{escape(kind.value.replace("_", " "))}</text>'
        )
    rows.append("</g>")
    return "\n".join(rows)


# ---------------------------------------------------------------------------
# argument wiring


def build_parser() -> _Parser:
    parser = _Parser(prog="tracemap",
                     description="Turn platform data exports into a 2D map.")
    parser.add_argument("--config", help="path to a JSON config file")
    parser.add_argument("--data-root", help="override the dataset directory")
    parser.add_argument("--json", action="store_true",
                        help="machine-readable output on stdout")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse an export into normalized events")
    p.add_argument("export", help="Takeout or Spotify history JSON file")
    p.add_argument("--transcripts", help="JSON sidecar mapping video id to text")
    p.add_argument("-o", "--output", help="events JSONL path "
                   "(default: <export>.events.jsonl)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("build", help="build a map dataset from an events file")
    p.add_argument("events", help="events JSONL produced by ingest")
    p.add_argument("--provider", choices=["local", "remote"],
                   help="embedding provider override")
    p.add_argument("--seed", type=int, help="layout seed override")
    p.add_argument("--name", help="display name for the dataset")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("serve", help="run the HTTP API")
    p.add_argument("--host", help="bind address")
    p.add_argument("--port", type=int, help="port")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("overlay", help="project one dataset into another's map")
    p.add_argument("target_id", help="dataset whose layout is kept")
    p.add_argument("other_id", help="dataset whose points are projected")
    p.set_defaults(func=cmd_overlay)

    p = sub.add_parser("export", help="write a static JSON or SVG rendering")
    p.add_argument("dataset_id")
    p.add_argument("--format", choices=["json", "svg"], required=True)
    p.add_argument("-o", "--output", help="file path (default: stdout)")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("frames", help="list cumulative animation windows")
    p.add_argument("dataset_id")
    p.add_argument("--step", choices=["month"], default="month")
    p.set_defaults(func=cmd_frames)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"tracemap: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        config = load_config(args.config)
        if args.data_root:
            config.data_root = args.data_root
        logging.basicConfig(level=config.log_level)
    except TracemapError as exc:
        print(f"tracemap: {exc}", file=sys.stderr)
        return EXIT_USAGE

    try:
        return args.func(args, config, args.json)
    except TracemapError as exc:
        print(f"tracemap: {exc}", file=sys.stderr)
        return _exit_code_for(exc)
    except FileNotFoundError as exc:
        print(f"tracemap: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (json.JSONDecodeError, ValueError) as exc:
        print(f"tracemap: bad input: {exc}", file=sys.stderr)
        return EXIT_DATA
    except KeyboardInterrupt:
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
