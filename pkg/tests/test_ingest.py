"""Parser goldens: exact expected event lists from hand-built fixtures."""

import hashlib
import json
from datetime import timedelta

import pytest
from hypothesis import given, strategies as st

from conftest import spotify_bytes, takeout_bytes, takeout_records
from tracemap.errors import MalformedExport, UnsupportedFormat
from tracemap.events import EventKind, Platform, format_instant
from tracemap.ingest import (
    apply_transcripts,
    classify_after_search,
    load_transcript_sidecar,
    parse_export,
    parse_spotify_history,
    parse_takeout_watch_history,
    sniff_platform,
)


def expect_id(platform: str, iso_ts: str, url: str | None, title: str) -> str:
    # inline restatement of the documented id recipe, independent of the
    # package helper
    h = hashlib.sha256()
    h.update(f"{platform}\x00{iso_ts}\x00{url or ''}\x00{title}".encode())
    return h.hexdigest()[:16]


def test_takeout_golden_exact():
    events = parse_takeout_watch_history(takeout_bytes())
    got = [
        (e.kind.value, e.title, e.url, e.channel_or_artist, e.item_id,
         format_instant(e.timestamp), e.text_payload, e.event_id)
        for e in events
    ]
    expected = [
        ("watched", "Foo", "https://www.youtube.com/watch?v=abc123",
         "BarChannel", "abc123", "2021-01-02T03:04:05Z", "Foo BarChannel",
         expect_id("youtube", "2021-01-02T03:04:05Z",
                   "https://www.youtube.com/watch?v=abc123", "Foo")),
        ("searched", "guitar lessons",
         "https://www.youtube.com/results?search_query=guitar+lessons",
         None, None, "2021-01-02T10:00:00Z", "guitar lessons",
         expect_id("youtube", "2021-01-02T10:00:00Z",
                   "https://www.youtube.com/results?search_query=guitar+lessons",
                   "guitar lessons")),
        ("watched", "Guitar tutorial for beginners",
         "https://www.youtube.com/watch?v=gtr111", "StringsAcademy", "gtr111",
         "2021-01-02T10:03:00Z",
         "Guitar tutorial for beginners StringsAcademy",
         expect_id("youtube", "2021-01-02T10:03:00Z",
                   "https://www.youtube.com/watch?v=gtr111",
                   "Guitar tutorial for beginners")),
        ("watched", "Cooking pasta from scratch",
         "https://www.youtube.com/watch?v=pasta99", "HomeKitchen", "pasta99",
         "2021-01-02T10:20:00Z", "Cooking pasta from scratch HomeKitchen",
         expect_id("youtube", "2021-01-02T10:20:00Z",
                   "https://www.youtube.com/watch?v=pasta99",
                   "Cooking pasta from scratch")),
        ("ad", "Mattress sale event", "https://www.youtube.com/watch?v=admat01",
         None, "admat01", "2021-01-03T08:00:00Z", "Mattress sale event",
         expect_id("youtube", "2021-01-03T08:00:00Z",
                   "https://www.youtube.com/watch?v=admat01",
                   "Mattress sale event")),
        ("short", "Funny cat clip", "https://www.youtube.com/shorts/sh0rt77",
         None, "sh0rt77", "2021-01-04T09:30:00Z", "Funny cat clip",
         expect_id("youtube", "2021-01-04T09:30:00Z",
                   "https://www.youtube.com/shorts/sh0rt77", "Funny cat clip")),
    ]
    assert got == expected


def test_five_kind_classification_via_parse_export():
    events = parse_export(takeout_bytes())
    kinds = [e.kind for e in events]
    assert kinds == [
        EventKind.WATCHED,
        EventKind.SEARCHED,
        EventKind.WATCHED_AFTER_SEARCH,  # 3 min after the search
        EventKind.WATCHED,               # 20 min after: outside the window
        EventKind.AD,
        EventKind.SHORT,
    ]


def test_spotify_golden_exact():
    events = parse_spotify_history(spotify_bytes())
    got = [
        (e.kind.value, e.title, e.channel_or_artist, e.url,
         format_instant(e.timestamp), e.text_payload)
        for e in events
    ]
    # the 4s play and the trackless podcast row are dropped
    assert got == [
        ("listened", "Song A", "Artist B", None,
         "2022-05-01T10:00:00Z", "Song A Artist B"),
        ("listened", "Deep Cut", "Artist D", "spotify:track:xyz",
         "2022-06-01T09:30:00Z", "Deep Cut Artist D"),
    ]
    assert all(e.platform is Platform.SPOTIFY for e in events)


def test_empty_arrays():
    assert parse_takeout_watch_history(b"[]") == []
    assert parse_spotify_history(b"[]") == []


def test_html_export_rejected():
    with pytest.raises(UnsupportedFormat):
        parse_takeout_watch_history(b"<!DOCTYPE html><html></html>")


def test_malformed_reports_record_index():
    records = takeout_records()
    del records[2]["time"]
    with pytest.raises(MalformedExport) as info:
        parse_takeout_watch_history(json.dumps(records).encode())
    assert info.value.record_index == 2

    with pytest.raises(MalformedExport):
        parse_takeout_watch_history(b"{\"not\": \"an array\"}")
    with pytest.raises(MalformedExport):
        parse_spotify_history(b"not json at all")


def test_classify_after_search_window_boundary():
    events = parse_takeout_watch_history(takeout_bytes())
    # exactly at the window edge still counts (<=)
    ten = classify_after_search(events, timedelta(minutes=3))
    assert ten[2].kind is EventKind.WATCHED_AFTER_SEARCH
    narrow = classify_after_search(events, timedelta(minutes=2))
    assert narrow[2].kind is EventKind.WATCHED


def test_classify_after_search_idempotent_and_pure():
    events = parse_takeout_watch_history(takeout_bytes())
    once = classify_after_search(events)
    twice = classify_after_search(once)
    assert [e.kind for e in once] == [e.kind for e in twice]
    assert [e.event_id for e in once] == [e.event_id for e in events]
    # original list untouched
    assert events[2].kind is EventKind.WATCHED


def test_classify_no_search_is_identity():
    events = parse_spotify_history(spotify_bytes())
    assert classify_after_search(events) == events


def test_sniff_platform():
    assert sniff_platform(takeout_bytes()) is Platform.YOUTUBE
    assert sniff_platform(spotify_bytes()) is Platform.SPOTIFY


def test_parse_export_deterministic():
    a = parse_export(takeout_bytes())
    b = parse_export(takeout_bytes())
    assert a == b


def test_transcript_sidecar_swaps_payload():
    sidecar = load_transcript_sidecar(
        json.dumps({"abc123": "full transcript text here"}).encode()
    )
    events = parse_export(takeout_bytes(), transcripts=sidecar)
    by_item = {e.item_id: e for e in events}
    assert by_item["abc123"].text_payload == "full transcript text here"
    # everyone else keeps the title+channel payload
    assert by_item["gtr111"].text_payload.startswith("Guitar tutorial")


def test_apply_transcripts_ignores_blank_and_missing():
    events = parse_takeout_watch_history(takeout_bytes())
    hits = apply_transcripts(events, {"abc123": "   ", "nope": "x"})
    assert hits == 0
    assert events[0].text_payload == "Foo BarChannel"


def test_sidecar_must_be_object():
    with pytest.raises(MalformedExport):
        load_transcript_sidecar(b"[1, 2]")


@given(st.integers(min_value=0, max_value=5))
def test_parse_round_trip_stability(shift):
    """Re-serializing parsed events and re-parsing the raw again agree."""
    records = takeout_records()[shift:]
    raw = json.dumps(records).encode()
    assert parse_export(raw) == parse_export(raw)
