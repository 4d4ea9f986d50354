"""Text embedding providers and the on-disk embedding cache.

Two providers ship with the engine:

* ``local-hash`` — a deterministic hashed bag-of-words embedder used for
  tests, demos, and offline builds. No network, no model weights.
* ``remote-http`` — POSTs batches to a configurable HTTP endpoint that is
  shape-compatible with common public embeddings APIs.

All embedding goes through :func:`embed_texts`, which consults a persistent
content-addressed cache so duplicate texts are embedded once, ever.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import re
import sqlite3
import threading
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import requests

from .errors import DimensionMismatch, EmptyText, ProviderUnavailable

log = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"[a-z0-9]+")

DEFAULT_BATCH_SIZE = 128
DEFAULT_LOCAL_DIM = 64
DEFAULT_LOCAL_SEED = 0


def tokenize(text: str) -> list[str]:
    """Lowercase and split on non-alphanumerics."""
    return _TOKEN_RE.findall(text.lower())


def local_hash_embed(text: str, dim: int = DEFAULT_LOCAL_DIM, seed: int = DEFAULT_LOCAL_SEED) -> np.ndarray:
    """Deterministic hashed bag-of-words vector, L2-normalized.

    Each token's seeded hash picks an index in [0, dim) and a sign; signed
    token counts accumulate and the result is normalized. Token order does
    not matter. Fully determined by (text, dim, seed) — hashing goes through
    blake2b, never Python's randomized hash().
    """
    if dim < 8:
        raise ValueError("dim must be >= 8")
    tokens = tokenize(text)
    if not tokens:
        raise EmptyText(f"no tokens survive normalization of {text!r}")
    vec = np.zeros(dim, dtype=np.float64)
    seed_bytes = seed.to_bytes(8, "little", signed=True)
    for tok in tokens:
        digest = hashlib.blake2b(tok.encode(), key=seed_bytes, digest_size=8).digest()
        value = int.from_bytes(digest, "little")
        index = value % dim
        sign = 1.0 if (value >> 63) & 1 else -1.0
        vec[index] += sign
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        # opposing signs cancelled every bucket; nudge the first token's slot
        vec[index] = 1.0
        norm = 1.0
    return (vec / norm).astype(np.float32)


class LocalHashProvider:
    """Offline deterministic provider (see :func:`local_hash_embed`)."""

    def __init__(self, dim: int = DEFAULT_LOCAL_DIM, seed: int = DEFAULT_LOCAL_SEED):
        self.dim = dim
        self.seed = seed
        self.provider_id = f"local-hash-d{dim}-s{seed}"

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        return np.stack([local_hash_embed(t, self.dim, self.seed) for t in texts])


class RemoteHttpProvider:
    """HTTP embeddings provider.

    POSTs ``{"input": [...texts], "model": name}`` and expects a JSON body
    with one vector per input, in order, under ``data[i].embedding``
    (``embeddings[i]`` is accepted too). The dimension is taken from the
    first response; later mismatches raise :class:`DimensionMismatch`.
    """

    def __init__(
        self,
        endpoint: str,
        model: str,
        auth_token: str | None = None,
        timeout: float = 60.0,
        max_retries: int = 4,
        backoff: float = 0.5,
    ):
        self.endpoint = endpoint
        self.model = model
        self.auth_token = auth_token
        self.timeout = timeout
        self.max_retries = max_retries
        self.backoff = backoff
        self.dim: int | None = None
        self.provider_id = f"remote-http:{model}"
        self._session = requests.Session()

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json"}
        if self.auth_token:
            headers["Authorization"] = f"Bearer {self.auth_token}"
        return headers

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        payload = {"input": texts, "model": self.model}
        last_error: Exception | None = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                resp = self._session.post(
                    self.endpoint, json=payload, headers=self._headers(), timeout=self.timeout
                )
            except requests.RequestException as exc:
                last_error = exc
                continue
            if resp.status_code in (429,) or resp.status_code >= 500:
                last_error = ProviderUnavailable(
                    f"endpoint returned {resp.status_code}"
                )
                continue
            if resp.status_code != 200:
                raise ProviderUnavailable(
                    f"endpoint returned {resp.status_code}: {resp.text[:200]}"
                )
            return self._parse(resp.json(), len(texts))
        raise ProviderUnavailable(
            f"embedding endpoint unreachable after {self.max_retries + 1} attempts: {last_error}"
        )

    def _parse(self, body: dict, expected: int) -> np.ndarray:
        if "data" in body:
            rows = [item["embedding"] for item in body["data"]]
        elif "embeddings" in body:
            rows = body["embeddings"]
        else:
            raise ProviderUnavailable("response has neither 'data' nor 'embeddings'")
        if len(rows) != expected:
            raise ProviderUnavailable(
                f"expected {expected} vectors, got {len(rows)}"
            )
        arr = np.asarray(rows, dtype=np.float32)
        if arr.ndim != 2:
            raise DimensionMismatch("provider returned ragged vectors")
        if self.dim is None:
            self.dim = int(arr.shape[1])
        elif arr.shape[1] != self.dim:
            raise DimensionMismatch(
                f"provider returned dim {arr.shape[1]}, expected {self.dim}"
            )
        if not np.isfinite(arr).all():
            raise ProviderUnavailable("provider returned non-finite components")
        return arr


def content_hash(provider_id: str, text: str) -> str:
    h = hashlib.sha256()
    h.update(provider_id.encode())
    h.update(b"\x00")
    h.update(text.encode())
    return h.hexdigest()


class EmbeddingCache:
    """Persistent content-addressed vector cache (single SQLite file).

    Keyed by hash(provider_id, text); safe for concurrent readers/writers
    within and across processes (WAL + busy timeout). Survives restarts.
    """

    FORMAT = "sqlite-v1"

    def __init__(self, path: str | os.PathLike):
        self.path = str(path)
        parent = os.path.dirname(self.path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        self._local = threading.local()
        with self._conn() as conn:
            conn.execute(
                "CREATE TABLE IF NOT EXISTS vectors ("
                " content_hash TEXT PRIMARY KEY,"
                " provider_id TEXT NOT NULL,"
                " dim INTEGER NOT NULL,"
                " vector BLOB NOT NULL)"
            )

    def _conn(self) -> sqlite3.Connection:
        conn = getattr(self._local, "conn", None)
        if conn is None:
            conn = sqlite3.connect(self.path, timeout=30.0)
            conn.execute("PRAGMA journal_mode=WAL")
            conn.execute("PRAGMA synchronous=NORMAL")
            self._local.conn = conn
        return conn

    def get(self, key: str) -> np.ndarray | None:
        row = self._conn().execute(
            "SELECT dim, vector FROM vectors WHERE content_hash = ?", (key,)
        ).fetchone()
        if row is None:
            return None
        dim, blob = row
        return np.frombuffer(blob, dtype=np.float32, count=dim).copy()

    def put(self, key: str, provider_id: str, vector: np.ndarray) -> None:
        blob = np.ascontiguousarray(vector, dtype=np.float32).tobytes()
        with self._conn() as conn:
            conn.execute(
                "INSERT OR REPLACE INTO vectors (content_hash, provider_id, dim, vector)"
                " VALUES (?, ?, ?, ?)",
                (key, provider_id, len(vector), blob),
            )

    def __len__(self) -> int:
        return self._conn().execute("SELECT COUNT(*) FROM vectors").fetchone()[0]

    def close(self) -> None:
        conn = getattr(self._local, "conn", None)
        if conn is not None:
            conn.close()
            self._local.conn = None


class EmbedStats:
    """Cache hit/miss counters for one embed_texts run."""

    def __init__(self):
        self.hits = 0
        self.misses = 0


def embed_texts(
    texts: list[str],
    provider,
    cache: EmbeddingCache | None = None,
    batch_size: int = DEFAULT_BATCH_SIZE,
    parallelism: int = 1,
    stats: EmbedStats | None = None,
) -> np.ndarray:
    """Embed texts in input order, consulting the cache first.

    Uncached texts go to the provider in batches of ``batch_size``; batches
    may run concurrently up to ``parallelism`` but results are assembled in
    input order regardless of completion order. Identical texts are embedded
    once per provider. Returns an (n, dim) float32 array.
    """
    if any(not t for t in texts):
        raise EmptyText("embed_texts requires non-empty texts")
    stats = stats if stats is not None else EmbedStats()
    provider_id = provider.provider_id
    n = len(texts)
    out: list[np.ndarray | None] = [None] * n

    # Resolve cache hits and collapse duplicate texts to one provider call.
    pending: dict[str, list[int]] = {}
    pending_keys: dict[str, str] = {}
    for i, text in enumerate(texts):
        key = content_hash(provider_id, text)
        cached = cache.get(key) if cache is not None else None
        if cached is not None:
            out[i] = cached
            stats.hits += 1
            continue
        stats.misses += 1
        if text in pending:
            pending[text].append(i)
        else:
            pending[text] = [i]
            pending_keys[text] = key

    unique_texts = list(pending.keys())
    batches = [
        unique_texts[start:start + batch_size]
        for start in range(0, len(unique_texts), batch_size)
    ]

    def run(batch: list[str]) -> np.ndarray:
        return provider.embed_batch(batch)

    if parallelism > 1 and len(batches) > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(run, batches))
    else:
        results = [run(b) for b in batches]

    expected_dim = getattr(provider, "dim", None)
    for batch, arr in zip(batches, results):
        if expected_dim is not None and arr.shape[1] != expected_dim:
            raise DimensionMismatch(
                f"provider returned dim {arr.shape[1]}, declared {expected_dim}"
            )
        for text, vector in zip(batch, arr):
            if cache is not None:
                cache.put(pending_keys[text], provider_id, vector)
            for i in pending[text]:
                out[i] = vector

    matrix = np.stack([v for v in out])  # type: ignore[arg-type]
    if matrix.shape[0] != n:
        raise AssertionError("assembly dropped rows")
    return matrix.astype(np.float32, copy=False)


def make_provider(settings: dict):
    """Build a provider from config settings (see config module)."""
    name = settings.get("provider", "local")
    if name in ("local", "local-hash"):
        return LocalHashProvider(
            dim=int(settings.get("dim", DEFAULT_LOCAL_DIM)),
            seed=int(settings.get("seed", DEFAULT_LOCAL_SEED)),
        )
    if name in ("remote", "remote-http"):
        endpoint = settings.get("endpoint") or os.environ.get("TRACEMAP_EMBED_ENDPOINT")
        if not endpoint:
            raise ProviderUnavailable("remote provider requires an endpoint")
        token_env = settings.get("auth_env", "TRACEMAP_API_TOKEN")
        return RemoteHttpProvider(
            endpoint=endpoint,
            model=settings.get("model", "text-embedding"),
            auth_token=os.environ.get(token_env),
            max_retries=int(settings.get("max_retries", 4)),
            backoff=float(settings.get("backoff", 0.5)),
        )
    raise ValueError(f"unknown embedding provider {name!r}")
