"""Command-line behavior: outputs, cache reuse, artifacts, exit codes."""

import contextlib
import io
import json
import os
from types import SimpleNamespace

import pytest

from conftest import corpus_records, spotify_records, takeout_records
from tracemap.cli import main
from tracemap.events import KIND_STYLES, EventKind


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main(list(argv))
    return code, out.getvalue(), err.getvalue()


@pytest.fixture(scope="module")
def env(tmp_path_factory):
    """Config file, ingested events, and two built datasets."""
    base = tmp_path_factory.mktemp("cli")
    root = base / "data"
    config = {
        "data_root": str(root),
        "embedding": {"dim": 32},
        "reducer": {"k": 8, "epochs": 64},
        "map": {"resolution": 128},
    }
    config_path = base / "config.json"
    config_path.write_text(json.dumps(config))

    takeout = base / "takeout.json"
    takeout.write_text(json.dumps(corpus_records(60)))
    spotify = base / "spotify.json"
    spotify.write_text(json.dumps(spotify_records()))

    code, _, _ = run_cli("ingest", str(takeout))
    assert code == 0
    events = base / "takeout.events.jsonl"
    assert events.is_file()

    sp_events = base / "spotify.events.jsonl"
    code, _, _ = run_cli("ingest", str(spotify), "-o", str(sp_events))
    assert code == 0

    code, out, _ = run_cli("--config", str(config_path), "--json",
                           "build", str(events))
    assert code == 0
    built = json.loads(out)
    assert built["reused"] is False

    code, out, _ = run_cli("--config", str(config_path), "--json",
                           "build", str(sp_events))
    assert code == 0
    sp_built = json.loads(out)

    return SimpleNamespace(
        base=base,
        root=root,
        config=str(config_path),
        takeout=str(takeout),
        events=str(events),
        sp_events=str(sp_events),
        dataset_id=built["dataset_id"],
        layout_hash=built["layout_hash"],
        sp_dataset_id=sp_built["dataset_id"],
    )


def test_ingest_output_and_order(env, tmp_path):
    out_path = tmp_path / "again.events.jsonl"
    code, out, err = run_cli("ingest", env.takeout, "-o", str(out_path))
    assert code == 0
    assert out.strip() == f"wrote 60 events to {out_path}"

    rows = [json.loads(line) for line in out_path.read_text().splitlines()]
    assert len(rows) == 60
    keys = [(r["timestamp"], r["event_id"]) for r in rows]
    assert keys == sorted(keys)


def test_ingest_json_mode(env, tmp_path):
    out_path = tmp_path / "m.events.jsonl"
    code, out, _ = run_cli("--json", "ingest", env.takeout, "-o", str(out_path))
    assert code == 0
    payload = json.loads(out)
    assert payload == {"events": 60, "output": str(out_path)}


def test_build_reuses_cache(env):
    code, out, err = run_cli("--config", env.config, "--json",
                             "build", env.events)
    assert code == 0
    payload = json.loads(out)
    assert payload["reused"] is True
    assert payload["dataset_id"] == env.dataset_id
    assert payload["layout_hash"] == env.layout_hash
    assert "stage:" not in err  # no pipeline ran

    code, out, _ = run_cli("--config", env.config, "build", env.events)
    assert code == 0
    assert out.strip() == (
        f"reused cache for dataset {env.dataset_id}; layout {env.layout_hash}"
    )


def test_build_human_mode_reports_stages(env, tmp_path):
    fresh = tmp_path / "fresh.json"
    fresh.write_text(json.dumps(corpus_records(40)))
    code, _, _ = run_cli("ingest", str(fresh))
    assert code == 0
    code, out, err = run_cli("--config", env.config, "build",
                             str(tmp_path / "fresh.events.jsonl"))
    assert code == 0
    assert out.startswith("built dataset ")
    assert "; layout " in out
    for stage in ("embedding", "reducing", "labeling"):
        assert f"stage: {stage}" in err


def test_frames_human_and_json(env):
    code, out, _ = run_cli("--config", env.config, "--json",
                           "frames", env.dataset_id)
    assert code == 0
    payload = json.loads(out)
    assert payload["count"] == len(payload["frames"])
    assert payload["step"] == "month"

    code, out, err = run_cli("--config", env.config, "frames", env.dataset_id)
    assert code == 0
    lines = out.strip().splitlines()
    assert len(lines) == payload["count"]
    assert lines[0].split() == [payload["frames"][0]["start"],
                                payload["frames"][0]["end"]]
    assert f"{payload['count']} frames" in err


def test_export_json_to_stdout(env):
    code, out, _ = run_cli("--config", env.config, "export", env.dataset_id,
                           "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["manifest"]["dataset_id"] == env.dataset_id
    assert len(doc["points"]) == doc["manifest"]["event_count"]
    assert len(doc["contours"]["levels"]) == 5
    assert doc["labels"], "zoom-0 labels belong in the static export"


def test_export_json_to_file(env, tmp_path):
    out_path = tmp_path / "map.json"
    code, out, _ = run_cli("--config", env.config, "export", env.dataset_id,
                           "--format", "json", "-o", str(out_path))
    assert code == 0
    assert out.strip() == f"wrote json export to {out_path}"
    json.loads(out_path.read_text())


def test_export_svg(env, tmp_path):
    out_path = tmp_path / "map.svg"
    code, _, _ = run_cli("--config", env.config, "export", env.dataset_id,
                         "--format", "svg", "-o", str(out_path))
    assert code == 0
    svg = out_path.read_text()
    assert svg.startswith("<svg ")
    assert svg.rstrip().endswith("</svg>")
    assert 'stroke="#94a3b8"' in svg  # contour strokes
    assert KIND_STYLES[EventKind.WATCHED].color_hex in svg
    assert ">watched<" in svg  # legend names the kinds present


def test_overlay_command(env):
    code, out, _ = run_cli("--config", env.config, "--json", "overlay",
                           env.dataset_id, env.sp_dataset_id)
    assert code == 0
    payload = json.loads(out)
    assert payload["target_id"] == env.dataset_id
    assert payload["other_id"] == env.sp_dataset_id
    assert payload["points"] > 0
    assert os.path.isfile(payload["output"])


def test_exit_code_usage_errors(env):
    assert run_cli()[0] == 1
    assert run_cli("bogus-command")[0] == 1
    code, _, err = run_cli("--config", "/does/not/exist.json",
                           "frames", env.dataset_id)
    assert code == 1
    assert "tracemap:" in err
    assert run_cli("--config", env.config, "frames", env.dataset_id,
                   "--step", "week")[0] == 1


def test_exit_code_data_errors(env, tmp_path):
    code, _, err = run_cli("ingest", str(tmp_path / "missing.json"))
    assert code == 2
    assert "tracemap:" in err

    html = tmp_path / "export.html"
    html.write_text("<html><body>not json</body></html>")
    assert run_cli("ingest", str(html))[0] == 2

    assert run_cli("--config", env.config, "export", "feedfeedfeedfeed",
                   "--format", "json")[0] == 2
    assert run_cli("--config", env.config, "overlay", env.dataset_id,
                   "feedfeedfeedfeed")[0] == 2


def test_exit_code_provider_errors(env, tmp_path):
    # remote embedding without an endpoint is a provider failure, and the
    # mismatch between two datasets' providers is one too
    fresh = tmp_path / "p.json"
    fresh.write_text(json.dumps(corpus_records(10)))
    run_cli("ingest", str(fresh))
    code, _, err = run_cli("--config", env.config, "build",
                           str(tmp_path / "p.events.jsonl"),
                           "--provider", "remote")
    assert code == 3
    assert "tracemap:" in err

    small = {
        "data_root": str(env.root),
        "embedding": {"dim": 16},
        "reducer": {"k": 8, "epochs": 32},
        "map": {"resolution": 64},
    }
    small_cfg = tmp_path / "small.json"
    small_cfg.write_text(json.dumps(small))
    code, out, _ = run_cli("--config", str(small_cfg), "--json",
                           "build", env.sp_events)
    assert code == 0
    other_id = json.loads(out)["dataset_id"]
    assert run_cli("--config", env.config, "overlay",
                   env.dataset_id, other_id)[0] == 3


def test_data_root_flag_overrides_config(env, tmp_path):
    code, _, _ = run_cli("--config", env.config,
                         "--data-root", str(tmp_path),
                         "export", env.dataset_id, "--format", "json")
    assert code == 2  # dataset does not exist under the overridden root
