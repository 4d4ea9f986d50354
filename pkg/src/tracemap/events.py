"""Normalized interaction events and their fixed kind/color taxonomy."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict
from datetime import datetime, timezone
from enum import Enum
from typing import Iterable, Iterator, TextIO


class Platform(str, Enum):
    YOUTUBE = "youtube"
    SPOTIFY = "spotify"


class EventKind(str, Enum):
    WATCHED = "watched"
    SEARCHED = "searched"
    WATCHED_AFTER_SEARCH = "watched_after_search"
    AD = "ad"
    SHORT = "short"
    LISTENED = "listened"


# Kinds that only make sense on one platform.
_YOUTUBE_ONLY = {
    EventKind.SEARCHED,
    EventKind.WATCHED_AFTER_SEARCH,
    EventKind.AD,
    EventKind.SHORT,
}
_SPOTIFY_ONLY = {EventKind.LISTENED}


@dataclass(frozen=True)
class KindStyle:
    kind: EventKind
    color_name: str
    color_hex: str


# One style per kind; hex values are fixed here and exposed to the UI/SVG
# export so every rendering surface agrees on the legend.
KIND_STYLES: dict[EventKind, KindStyle] = {
    EventKind.WATCHED: KindStyle(EventKind.WATCHED, "pink", "#ec4899"),
    EventKind.SEARCHED: KindStyle(EventKind.SEARCHED, "purple", "#a855f7"),
    EventKind.WATCHED_AFTER_SEARCH: KindStyle(
        EventKind.WATCHED_AFTER_SEARCH, "yellow", "#eab308"
    ),
    EventKind.AD: KindStyle(EventKind.AD, "green", "#22c55e"),
    EventKind.SHORT: KindStyle(EventKind.SHORT, "blue", "#3b82f6"),
    EventKind.LISTENED: KindStyle(EventKind.LISTENED, "teal", "#14b8a6"),
}


def parse_instant(value: str) -> datetime:
    """Parse an ISO-8601 instant into an aware UTC datetime.

    Accepts a trailing ``Z`` (common in exports) and bare local-looking
    values such as ``2022-05-01 10:00``, which are taken as UTC.
    """
    text = value.strip()
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_instant(dt: datetime) -> str:
    """Serialize an aware datetime as a canonical UTC ISO-8601 string."""
    dt = dt.astimezone(timezone.utc)
    if dt.microsecond:
        # keep all six digits: fromisoformat on 3.10 rejects odd widths
        return dt.strftime("%Y-%m-%dT%H:%M:%S.%f") + "Z"
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")


def event_id_for(platform: Platform, timestamp: datetime, url: str | None, title: str) -> str:
    """Deterministic identifier from the fields that define an interaction."""
    h = hashlib.sha256()
    h.update(platform.value.encode())
    h.update(b"\x00")
    h.update(format_instant(timestamp).encode())
    h.update(b"\x00")
    h.update((url or "").encode())
    h.update(b"\x00")
    h.update(title.encode())
    return h.hexdigest()[:16]


@dataclass
class FootprintEvent:
    """One timestamped interaction recovered from a personal data export."""

    event_id: str
    timestamp: datetime
    platform: Platform
    kind: EventKind
    title: str
    url: str | None = None
    channel_or_artist: str | None = None
    item_id: str | None = None
    text_payload: str = ""

    def __post_init__(self):
        if self.kind in _YOUTUBE_ONLY and self.platform is not Platform.YOUTUBE:
            raise ValueError(f"kind {self.kind.value} requires platform youtube")
        if self.kind in _SPOTIFY_ONLY and self.platform is not Platform.SPOTIFY:
            raise ValueError(f"kind {self.kind.value} requires platform spotify")
        if not self.text_payload:
            raise ValueError("text_payload must be non-empty")

    def style(self) -> KindStyle:
        return KIND_STYLES[self.kind]

    def to_json_obj(self) -> dict:
        obj = asdict(self)
        obj["timestamp"] = format_instant(self.timestamp)
        obj["platform"] = self.platform.value
        obj["kind"] = self.kind.value
        return obj

    @classmethod
    def from_json_obj(cls, obj: dict) -> "FootprintEvent":
        return cls(
            event_id=obj["event_id"],
            timestamp=parse_instant(obj["timestamp"]),
            platform=Platform(obj["platform"]),
            kind=EventKind(obj["kind"]),
            title=obj["title"],
            url=obj.get("url"),
            channel_or_artist=obj.get("channel_or_artist"),
            item_id=obj.get("item_id"),
            text_payload=obj["text_payload"],
        )


def write_events_jsonl(events: Iterable[FootprintEvent], fp: TextIO) -> int:
    """Write events one JSON object per line; returns the count written."""
    n = 0
    for ev in events:
        fp.write(json.dumps(ev.to_json_obj(), ensure_ascii=False, sort_keys=True))
        fp.write("\n")
        n += 1
    return n


def read_events_jsonl(fp: TextIO) -> Iterator[FootprintEvent]:
    for line in fp:
        line = line.strip()
        if line:
            yield FootprintEvent.from_json_obj(json.loads(line))


def dedupe_event_ids(events: list[FootprintEvent]) -> None:
    """Suffix repeated ids (-1, -2, ...) so ids are unique within a dataset.

    Duplicate records in an export (same platform+time+url+title) would
    otherwise hash identically; occurrence order keeps this deterministic.
    """
    seen: dict[str, int] = {}
    for ev in events:
        n = seen.get(ev.event_id)
        if n is None:
            seen[ev.event_id] = 0
        else:
            seen[ev.event_id] = n + 1
            ev.event_id = f"{ev.event_id}-{n + 1}"
