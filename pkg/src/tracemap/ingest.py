"""Parsers that turn raw personal data exports into normalized event streams.

Supported inputs:

* YouTube watch-history JSON from a Takeout archive (the HTML variant is
  rejected with :class:`UnsupportedFormat` — re-export as JSON).
* Spotify streaming-history JSON, both the classic ``StreamingHistoryN.json``
  shape and the extended ``endsong``/``ts`` shape.
* An optional transcript sidecar: a JSON object mapping item_id to transcript
  text, merged into each event's embedding payload.
"""

from __future__ import annotations

import json
import re
from datetime import timedelta
from urllib.parse import parse_qs, urlparse

from .errors import MalformedExport, UnsupportedFormat
from .events import (
    EventKind,
    FootprintEvent,
    Platform,
    dedupe_event_ids,
    event_id_for,
    parse_instant,
)

SEARCH_TITLE_PREFIX = "Searched for "
WATCH_TITLE_PREFIX = "Watched "
# Takeout marks served ads inside the record's "details" list.
AD_DETAIL_MARKER = "From Google Ads"
SHORTS_PATH_SEGMENT = "/shorts/"

#: plays shorter than this are treated as accidental and dropped
SPOTIFY_SKIP_THRESHOLD_MS = 30_000

#: a watch this long after the latest search counts as "watched after search"
DEFAULT_AFTER_SEARCH_WINDOW = timedelta(minutes=10)


def _load_json_array(raw: bytes, what: str) -> list:
    head = raw.lstrip()[:64]
    if head.startswith(b"<"):
        raise UnsupportedFormat(
            f"{what} looks like an HTML export; re-export it as JSON"
        )
    try:
        data = json.loads(raw.decode("utf-8-sig"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedExport(f"{what} is not valid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise MalformedExport(f"{what} is not a JSON array of records")
    return data


def _video_id_from_url(url: str) -> str | None:
    parsed = urlparse(url)
    if SHORTS_PATH_SEGMENT in parsed.path:
        tail = parsed.path.split(SHORTS_PATH_SEGMENT, 1)[1]
        return tail.split("/", 1)[0] or None
    qs = parse_qs(parsed.query)
    if "v" in qs and qs["v"]:
        return qs["v"][0]
    # youtu.be short links keep the id as the path
    if parsed.netloc.endswith("youtu.be"):
        return parsed.path.lstrip("/") or None
    return None


def _payload(title: str, channel: str | None) -> str:
    return f"{title} {channel}".strip() if channel else title


def parse_takeout_watch_history(raw: bytes) -> list[FootprintEvent]:
    """Parse a Takeout watch-history JSON export into sorted events.

    Classification per record: a title starting with the search marker becomes
    ``searched`` (query as title), an advertising details marker becomes
    ``ad``, a shorts URL becomes ``short``, everything else ``watched``.
    """
    records = _load_json_array(raw, "watch history")
    events: list[FootprintEvent] = []
    for idx, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise MalformedExport(f"record {idx} is not an object", record_index=idx)
        if "time" not in rec:
            raise MalformedExport(f"record {idx} has no time field", record_index=idx)
        try:
            ts = parse_instant(str(rec["time"]))
        except ValueError as exc:
            raise MalformedExport(
                f"record {idx} has unparseable time {rec['time']!r}", record_index=idx
            ) from exc

        raw_title = str(rec.get("title", "")).strip()
        url = rec.get("titleUrl")
        url = str(url) if url else None
        subtitles = rec.get("subtitles") or []
        channel = None
        if subtitles and isinstance(subtitles, list) and isinstance(subtitles[0], dict):
            channel = subtitles[0].get("name") or None

        details = rec.get("details") or []
        detail_names = {
            d.get("name") for d in details if isinstance(d, dict)
        }

        if raw_title.startswith(SEARCH_TITLE_PREFIX):
            kind = EventKind.SEARCHED
            title = raw_title[len(SEARCH_TITLE_PREFIX):].strip()
        elif AD_DETAIL_MARKER in detail_names:
            kind = EventKind.AD
            title = _strip_watch_prefix(raw_title)
        elif url and SHORTS_PATH_SEGMENT in url:
            kind = EventKind.SHORT
            title = _strip_watch_prefix(raw_title)
        else:
            kind = EventKind.WATCHED
            title = _strip_watch_prefix(raw_title)

        if not title:
            title = "(untitled)"
        item_id = _video_id_from_url(url) if url else None
        events.append(
            FootprintEvent(
                event_id=event_id_for(Platform.YOUTUBE, ts, url, title),
                timestamp=ts,
                platform=Platform.YOUTUBE,
                kind=kind,
                title=title,
                url=url,
                channel_or_artist=channel,
                item_id=item_id,
                text_payload=_payload(title, channel),
            )
        )
    events.sort(key=lambda e: (e.timestamp, e.event_id))
    dedupe_event_ids(events)
    return events


def _strip_watch_prefix(title: str) -> str:
    if title.startswith(WATCH_TITLE_PREFIX):
        return title[len(WATCH_TITLE_PREFIX):].strip()
    return title


def parse_spotify_history(
    raw: bytes, skip_threshold_ms: int = SPOTIFY_SKIP_THRESHOLD_MS
) -> list[FootprintEvent]:
    """Parse a Spotify streaming-history JSON export into sorted events.

    Plays shorter than ``skip_threshold_ms`` are excluded so accidental
    skips don't end up on the map.
    """
    records = _load_json_array(raw, "streaming history")
    events: list[FootprintEvent] = []
    for idx, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise MalformedExport(f"record {idx} is not an object", record_index=idx)
        track = rec.get("trackName") or rec.get("master_metadata_track_name")
        artist = rec.get("artistName") or rec.get("master_metadata_album_artist_name")
        when = rec.get("endTime") or rec.get("ts")
        ms_played = rec.get("msPlayed", rec.get("ms_played"))
        if when is None:
            raise MalformedExport(
                f"record {idx} has no endTime/ts field", record_index=idx
            )
        if not track:
            # podcast rows in extended exports have no track name; skip them
            continue
        try:
            ts = parse_instant(str(when))
        except ValueError as exc:
            raise MalformedExport(
                f"record {idx} has unparseable time {when!r}", record_index=idx
            ) from exc
        if ms_played is not None and int(ms_played) < skip_threshold_ms:
            continue
        title = str(track).strip()
        artist = str(artist).strip() if artist else None
        url = rec.get("spotify_track_uri") or None
        events.append(
            FootprintEvent(
                event_id=event_id_for(Platform.SPOTIFY, ts, url, title),
                timestamp=ts,
                platform=Platform.SPOTIFY,
                kind=EventKind.LISTENED,
                title=title,
                url=url,
                channel_or_artist=artist,
                item_id=None,
                text_payload=_payload(title, artist),
            )
        )
    events.sort(key=lambda e: (e.timestamp, e.event_id))
    dedupe_event_ids(events)
    return events


def classify_after_search(
    events: list[FootprintEvent], window: timedelta = DEFAULT_AFTER_SEARCH_WINDOW
) -> list[FootprintEvent]:
    """Reclassify watches that follow a search within ``window``.

    Input must be sorted by timestamp. Pure: returns a new list, order
    preserved, non-watched kinds untouched. Idempotent, since reclassified
    events are no longer ``watched``.
    """
    out: list[FootprintEvent] = []
    last_search = None
    for ev in events:
        if ev.kind is EventKind.SEARCHED:
            last_search = ev.timestamp
            out.append(ev)
            continue
        if (
            ev.kind is EventKind.WATCHED
            and last_search is not None
            and timedelta(0) <= ev.timestamp - last_search <= window
        ):
            out.append(
                FootprintEvent(
                    event_id=ev.event_id,
                    timestamp=ev.timestamp,
                    platform=ev.platform,
                    kind=EventKind.WATCHED_AFTER_SEARCH,
                    title=ev.title,
                    url=ev.url,
                    channel_or_artist=ev.channel_or_artist,
                    item_id=ev.item_id,
                    text_payload=ev.text_payload,
                )
            )
        else:
            out.append(ev)
    return out


def load_transcript_sidecar(raw: bytes) -> dict[str, str]:
    """Load a transcript sidecar: JSON object mapping item_id -> transcript."""
    try:
        data = json.loads(raw.decode("utf-8-sig"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedExport(f"transcript sidecar is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise MalformedExport("transcript sidecar must be a JSON object")
    return {str(k): str(v) for k, v in data.items()}


def apply_transcripts(
    events: list[FootprintEvent], transcripts: dict[str, str]
) -> int:
    """Swap in transcript payloads where the sidecar has one.

    Payload fallback chain: transcript -> title + channel -> title.
    Returns how many events picked up a transcript.
    """
    hits = 0
    for ev in events:
        if ev.item_id and ev.item_id in transcripts:
            text = transcripts[ev.item_id].strip()
            if text:
                ev.text_payload = text
                hits += 1
    return hits


_TAKEOUT_HINT_KEYS = {"titleUrl", "subtitles", "activityControls", "products", "header"}


def sniff_platform(raw: bytes) -> Platform:
    """Guess which platform an export came from by its record shape."""
    records = _load_json_array(raw, "export")
    for rec in records:
        if not isinstance(rec, dict):
            continue
        if "trackName" in rec or "master_metadata_track_name" in rec or "msPlayed" in rec or "ms_played" in rec:
            return Platform.SPOTIFY
        if _TAKEOUT_HINT_KEYS & rec.keys() or "time" in rec:
            return Platform.YOUTUBE
    return Platform.YOUTUBE


def parse_export(
    raw: bytes,
    platform: Platform | None = None,
    transcripts: dict[str, str] | None = None,
    after_search_window: timedelta = DEFAULT_AFTER_SEARCH_WINDOW,
) -> list[FootprintEvent]:
    """One-stop parse: detect platform, parse, classify, apply transcripts."""
    if platform is None:
        platform = sniff_platform(raw)
    if platform is Platform.SPOTIFY:
        events = parse_spotify_history(raw)
    else:
        events = parse_takeout_watch_history(raw)
        events = classify_after_search(events, after_search_window)
    if transcripts:
        apply_transcripts(events, transcripts)
    return events
