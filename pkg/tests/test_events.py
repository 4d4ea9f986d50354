import io
import json
from datetime import datetime, timezone

import pytest
from hypothesis import given, strategies as st

from tracemap.events import (
    KIND_STYLES,
    EventKind,
    FootprintEvent,
    Platform,
    dedupe_event_ids,
    event_id_for,
    format_instant,
    parse_instant,
    read_events_jsonl,
    write_events_jsonl,
)


def make_event(**overrides):
    base = dict(
        event_id="e1",
        timestamp=datetime(2021, 5, 1, 10, 0, tzinfo=timezone.utc),
        platform=Platform.YOUTUBE,
        kind=EventKind.WATCHED,
        title="A video",
        url="https://www.youtube.com/watch?v=x1",
        channel_or_artist="Chan",
        item_id="x1",
        text_payload="A video Chan",
    )
    base.update(overrides)
    return FootprintEvent(**base)


def test_parse_instant_accepts_z_suffix_and_naive():
    assert parse_instant("2021-01-02T03:04:05Z") == datetime(
        2021, 1, 2, 3, 4, 5, tzinfo=timezone.utc
    )
    assert parse_instant("2022-05-01 10:00") == datetime(
        2022, 5, 1, 10, 0, tzinfo=timezone.utc
    )


def test_format_instant_round_trip():
    ts = datetime(2021, 1, 2, 3, 4, 5, tzinfo=timezone.utc)
    assert parse_instant(format_instant(ts)) == ts
    with_us = ts.replace(microsecond=123450)
    assert parse_instant(format_instant(with_us)) == with_us


def test_event_id_is_deterministic_and_field_sensitive():
    ts = datetime(2021, 1, 1, tzinfo=timezone.utc)
    a = event_id_for(Platform.YOUTUBE, ts, "u", "t")
    assert a == event_id_for(Platform.YOUTUBE, ts, "u", "t")
    assert a != event_id_for(Platform.SPOTIFY, ts, "u", "t")
    assert a != event_id_for(Platform.YOUTUBE, ts, "u2", "t")
    assert a != event_id_for(Platform.YOUTUBE, ts, "u", "t2")


def test_platform_kind_constraints():
    with pytest.raises(ValueError):
        make_event(kind=EventKind.LISTENED)  # youtube platform
    with pytest.raises(ValueError):
        make_event(platform=Platform.SPOTIFY, kind=EventKind.SEARCHED)
    with pytest.raises(ValueError):
        make_event(text_payload="")


def test_every_kind_has_exactly_one_style():
    assert set(KIND_STYLES) == set(EventKind)
    hexes = [s.color_hex for s in KIND_STYLES.values()]
    assert len(set(hexes)) == len(hexes)
    assert all(h.startswith("#") and len(h) == 7 for h in hexes)


def test_fig_color_names():
    names = {k.value: s.color_name for k, s in KIND_STYLES.items()}
    assert names == {
        "watched": "pink",
        "searched": "purple",
        "watched_after_search": "yellow",
        "ad": "green",
        "short": "blue",
        "listened": "teal",
    }


def test_jsonl_round_trip():
    events = [make_event(), make_event(event_id="e2", title="Other",
                                       url=None, item_id=None,
                                       channel_or_artist=None,
                                       text_payload="Other")]
    buf = io.StringIO()
    assert write_events_jsonl(events, buf) == 2
    buf.seek(0)
    back = list(read_events_jsonl(buf))
    assert back == events


def test_dedupe_event_ids_suffixes_in_order():
    events = [make_event(), make_event(), make_event()]
    dedupe_event_ids(events)
    assert [e.event_id for e in events] == ["e1", "e1-1", "e1-2"]


@given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), min_size=1),
       st.datetimes(min_value=datetime(1990, 1, 1),
                    max_value=datetime(2100, 1, 1)))
def test_jsonl_round_trip_property(title, naive_ts):
    ev = make_event(title=title, text_payload=title,
                    timestamp=naive_ts.replace(tzinfo=timezone.utc))
    buf = io.StringIO()
    write_events_jsonl([ev], buf)
    buf.seek(0)
    (back,) = list(read_events_jsonl(buf))
    assert back == ev
    # serialized form is valid single-line JSON
    buf.seek(0)
    line = buf.readline().rstrip("\n")
    assert json.loads(line)["title"] == title
