"""Engine configuration: data root, providers, reducer and topic defaults.

Config comes from an optional JSON file plus environment overrides. Unknown
keys are rejected so typos fail loudly instead of silently using defaults.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field

from .errors import ConfigError

ENV_CONFIG = "TRACEMAP_CONFIG"
ENV_DATA_ROOT = "TRACEMAP_DATA_ROOT"

DEFAULT_DATA_ROOT = "tracemap_data"


@dataclass
class Config:
    data_root: str = DEFAULT_DATA_ROOT
    log_level: str = "INFO"
    embedding: dict = field(default_factory=lambda: {
        "provider": "local", "dim": 64, "seed": 0,
        "batch_size": 128, "parallelism": 1,
        "endpoint": None, "model": "text-embedding",
        "auth_env": "TRACEMAP_API_TOKEN", "max_retries": 4, "backoff": 0.5,
    })
    reducer: dict = field(default_factory=lambda: {
        "k": 15, "metric": "cosine", "min_dist": 0.1, "spread": 1.0,
        "epochs": 200, "negative_sample_rate": 5.0,
        "repulsion_strength": 1.0, "seed": 0,
    })
    topics: dict = field(default_factory=lambda: {
        "provider": "stub", "levels": 4, "l0_max": 12,
        "endpoint": None, "auth_env": "TRACEMAP_API_TOKEN",
    })
    map: dict = field(default_factory=lambda: {
        "resolution": 256, "contour_levels": 5, "sample_size": 40,
        "after_search_window_minutes": 10, "summary_endpoint": None,
    })
    server: dict = field(default_factory=lambda: {
        "host": "127.0.0.1", "port": 8765, "cors_origins": ["*"],
    })

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def build_fingerprint(self) -> str:
        """Stable serialization of the sections that shape built artifacts.

        Used for content-addressing dataset ids, so deployment details
        (data root, port, log level) never change a dataset's identity.
        """
        relevant = {
            "embedding": self.embedding,
            "reducer": self.reducer,
            "topics": self.topics,
            "map": self.map,
        }
        return json.dumps(relevant, sort_keys=True, separators=(",", ":"))


def _merge_section(base: dict, override: dict, section: str) -> dict:
    unknown = set(override) - set(base)
    if unknown:
        raise ConfigError(f"unknown keys in config section {section!r}: {sorted(unknown)}")
    merged = dict(base)
    merged.update(override)
    return merged


def load_config(path: str | None = None) -> Config:
    """Build a Config from defaults, an optional JSON file, and env vars.

    Precedence: environment > file > defaults. The file path itself can
    come from the TRACEMAP_CONFIG variable when not passed explicitly.
    """
    cfg = Config()
    if path is None:
        path = os.environ.get(ENV_CONFIG)
    if path:
        try:
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in dataclasses.fields(Config)}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        for key, value in raw.items():
            current = getattr(cfg, key)
            if isinstance(current, dict):
                if not isinstance(value, dict):
                    raise ConfigError(f"config key {key!r} must be an object")
                setattr(cfg, key, _merge_section(current, value, key))
            else:
                setattr(cfg, key, value)
    env_root = os.environ.get(ENV_DATA_ROOT)
    if env_root:
        cfg.data_root = env_root
    return cfg
