"""Shared fixtures: golden export files and a small prebuilt dataset."""

from __future__ import annotations

import json

import numpy as np
import pytest

from tracemap.config import Config
from tracemap.store import build_dataset


def takeout_records() -> list[dict]:
    """Hand-built watch-history covering all five interaction kinds.

    Timing is chosen so classification is unambiguous: the 10:03 watch is
    3 minutes after the search (inside the 10-minute window), the 10:20
    watch is outside it.
    """
    return [
        {
            "header": "YouTube",
            "title": "Watched Foo",
            "titleUrl": "https://www.youtube.com/watch?v=abc123",
            "subtitles": [{"name": "BarChannel"}],
            "time": "2021-01-02T03:04:05Z",
            "products": ["YouTube"],
        },
        {
            "header": "YouTube",
            "title": "Searched for guitar lessons",
            "titleUrl": "https://www.youtube.com/results?search_query=guitar+lessons",
            "time": "2021-01-02T10:00:00Z",
            "products": ["YouTube"],
        },
        {
            "header": "YouTube",
            "title": "Watched Guitar tutorial for beginners",
            "titleUrl": "https://www.youtube.com/watch?v=gtr111",
            "subtitles": [{"name": "StringsAcademy"}],
            "time": "2021-01-02T10:03:00Z",
            "products": ["YouTube"],
        },
        {
            "header": "YouTube",
            "title": "Watched Cooking pasta from scratch",
            "titleUrl": "https://www.youtube.com/watch?v=pasta99",
            "subtitles": [{"name": "HomeKitchen"}],
            "time": "2021-01-02T10:20:00Z",
            "products": ["YouTube"],
        },
        {
            "header": "YouTube",
            "title": "Watched Mattress sale event",
            "titleUrl": "https://www.youtube.com/watch?v=admat01",
            "time": "2021-01-03T08:00:00Z",
            "details": [{"name": "From Google Ads"}],
            "products": ["YouTube"],
        },
        {
            "header": "YouTube",
            "title": "Watched Funny cat clip",
            "titleUrl": "https://www.youtube.com/shorts/sh0rt77",
            "time": "2021-01-04T09:30:00Z",
            "products": ["YouTube"],
        },
    ]


def takeout_bytes() -> bytes:
    return json.dumps(takeout_records()).encode()


def spotify_records() -> list[dict]:
    """Classic and extended record shapes plus rows the parser must drop."""
    return [
        {
            "endTime": "2022-05-01 10:00",
            "artistName": "Artist B",
            "trackName": "Song A",
            "msPlayed": 200000,
        },
        {
            "endTime": "2022-05-01 11:00",
            "artistName": "Artist C",
            "trackName": "Skip Me",
            "msPlayed": 4000,
        },
        {
            "ts": "2022-06-01T09:30:00Z",
            "master_metadata_track_name": "Deep Cut",
            "master_metadata_album_artist_name": "Artist D",
            "ms_played": 120000,
            "spotify_track_uri": "spotify:track:xyz",
        },
        {
            "ts": "2022-06-02T09:30:00Z",
            "master_metadata_track_name": None,
            "ms_played": 999999,
        },
    ]


def spotify_bytes() -> bytes:
    return json.dumps(spotify_records()).encode()


def corpus_records(n: int = 90) -> list[dict]:
    """Synthetic watch history with a few distinct vocabularies."""
    themes = [
        ("cooking", ["pasta recipe tutorial", "bread baking guide",
                     "knife skills lesson", "roast dinner ideas"]),
        ("space", ["rocket launch replay", "telescope deep field",
                   "mars rover update", "orbital mechanics explained"]),
        ("guitar", ["guitar chord practice", "blues solo lesson",
                    "amp tone settings", "fingerstyle arrangement"]),
    ]
    records = []
    for i in range(n):
        theme, titles = themes[i % len(themes)]
        title = titles[(i // len(themes)) % len(titles)]
        records.append({
            "header": "YouTube",
            "title": f"Watched {title} {theme} {i}",
            "titleUrl": f"https://www.youtube.com/watch?v=v{i:06d}",
            "subtitles": [{"name": f"{theme} channel"}],
            "time": f"2020-{1 + (i * 7 // n) % 12:02d}-{1 + i % 27:02d}"
                    f"T{i % 24:02d}:{(i * 13) % 60:02d}:00Z",
            "products": ["YouTube"],
        })
    return records


def fast_config(data_root: str) -> Config:
    """Small dims and few epochs; plenty for behavioral tests."""
    cfg = Config()
    cfg.data_root = data_root
    cfg.embedding["dim"] = 32
    cfg.reducer["k"] = 8
    cfg.reducer["epochs"] = 64
    cfg.map["resolution"] = 128
    return cfg


@pytest.fixture(scope="session")
def built(tmp_path_factory):
    """One shared built dataset (90 events, 3 themes) for read-side tests."""
    root = str(tmp_path_factory.mktemp("store"))
    config = fast_config(root)
    raw = json.dumps(corpus_records()).encode()
    dataset = build_dataset(raw, config, name="corpus")
    return dataset, config


def contour_vertex_residual(grid, polylines, level):
    """Worst |interpolated grid value - level| over every ring vertex.

    Each vertex must sit on a lattice edge between two adjacent cell
    centers with the value linearly interpolated to the level; this
    recomputes that interpolation from the raw grid.
    """
    xs, ys = grid.x_centers(), grid.y_centers()
    vals = grid.values
    worst = 0.0
    for line in polylines:
        for x, y in line:
            ix = int(np.clip(np.searchsorted(xs, x) - 1, 0, len(xs) - 2))
            iy = int(np.clip(np.searchsorted(ys, y) - 1, 0, len(ys) - 2))
            off_x = min(abs(x - xs[ix]), abs(x - xs[ix + 1]))
            off_y = min(abs(y - ys[iy]), abs(y - ys[iy + 1]))
            if off_y <= off_x:
                jy = iy if abs(y - ys[iy]) <= abs(y - ys[iy + 1]) else iy + 1
                t = (x - xs[ix]) / (xs[ix + 1] - xs[ix])
                v = vals[jy, ix] * (1 - t) + vals[jy, ix + 1] * t
            else:
                jx = ix if abs(x - xs[ix]) <= abs(x - xs[ix + 1]) else ix + 1
                t = (y - ys[iy]) / (ys[iy + 1] - ys[iy])
                v = vals[iy, jx] * (1 - t) + vals[iy + 1, jx] * t
            worst = max(worst, abs(v - level))
    return worst
