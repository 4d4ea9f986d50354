"""Shared synthetic corpus for the demo scripts.

Real exports are personal, so the demos run on a generated watch history
with three recognizable interest clusters. Same bytes every run, which
means every script resolves to the same cached dataset.
"""

from __future__ import annotations

import json
import os

from tracemap.config import Config
from tracemap.store import MapDataset, build_dataset, dataset_id_for, dataset_dir, load_dataset

HERE = os.path.dirname(os.path.abspath(__file__))
DATA_ROOT = os.path.join(HERE, "demo_data")

THEMES = [
    ("cooking", ["sourdough starter", "pasta from scratch", "knife skills",
                 "weeknight curry", "cast iron care", "stock and broth"]),
    ("astronomy", ["galaxy survey", "telescope collimation", "lunar eclipse",
                   "exoplanet transit", "star party", "deep field image"]),
    ("woodworking", ["dovetail joints", "hand plane tuning", "shop layout",
                     "bandsaw setup", "finishing oils", "mortise and tenon"]),
]


def demo_records(n: int = 240) -> list[dict]:
    records = []
    for i in range(n):
        theme, titles = THEMES[i % len(THEMES)]
        title = titles[(i // 3) % len(titles)]
        # two years of history, a few watches per day
        year = 2022 + (i * 2) // n
        month = 1 + (i * 12 // n) % 12
        day = 1 + (i * 7) % 27
        records.append({
            "header": "YouTube",
            "title": f"Watched {title} {theme} episode {i}",
            "titleUrl": f"https://www.youtube.com/watch?v=demo{i:05d}",
            "subtitles": [{"name": f"{theme} channel"}],
            "time": f"{year:04d}-{month:02d}-{day:02d}T{i % 24:02d}:{(i * 17) % 60:02d}:00Z",
            "products": ["YouTube"],
        })
    return records


def demo_config() -> Config:
    config = Config()
    config.data_root = DATA_ROOT
    config.embedding["dim"] = 32
    config.reducer["k"] = 8
    config.reducer["epochs"] = 64
    config.map["resolution"] = 128
    return config


def ensure_dataset() -> tuple[MapDataset, Config]:
    """Build the demo dataset once; later runs load it from the store."""
    config = demo_config()
    raw = json.dumps(demo_records()).encode()
    dataset_id = dataset_id_for(raw, config)
    if os.path.isfile(os.path.join(dataset_dir(DATA_ROOT, dataset_id),
                                   "manifest.json")):
        return load_dataset(DATA_ROOT, dataset_id), config
    return build_dataset(raw, config, name="demo corpus"), config
