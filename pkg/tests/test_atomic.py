"""Tests for src/atomic.py: atomic writes and report snapshots."""
from __future__ import annotations

import json
from datetime import datetime
from pathlib import Path

import pandas as pd
import pytest

from atomic import (
    _snapshot_name,
    _tmp_path,
    rotate_snapshots,
    take_snapshot,
    write_atomic_csv,
    write_atomic_text,
    write_report,
)


# ---------------------------------------------------------------------------
# write_atomic_text / write_atomic_csv
# ---------------------------------------------------------------------------

def test_write_atomic_text_creates_parents(tmp_path: Path) -> None:
    target = tmp_path / "reports" / "nested" / "out.json"
    write_atomic_text(target, '{"ok": true}')
    assert json.loads(target.read_text()) == {"ok": True}


def test_write_atomic_text_overwrites_existing(tmp_path: Path) -> None:
    target = tmp_path / "out.txt"
    target.write_text("old")
    write_atomic_text(target, "new")
    assert target.read_text() == "new"


def test_write_atomic_text_handles_utf8(tmp_path: Path) -> None:
    target = tmp_path / "out.txt"
    write_atomic_text(target, "μ = 2, 𝔽₄")
    assert target.read_text(encoding="utf-8") == "μ = 2, 𝔽₄"


def test_no_tmp_file_left_behind(tmp_path: Path) -> None:
    target = tmp_path / "out.txt"
    write_atomic_text(target, "x")
    assert not _tmp_path(target).exists()


def test_failed_write_keeps_old_contents(tmp_path: Path) -> None:
    target = tmp_path / "census.csv"
    target.write_text("old")

    class Broken(pd.DataFrame):
        def to_csv(self, *args, **kwargs):
            raise OSError("disk full")

    with pytest.raises(OSError, match="disk full"):
        write_atomic_csv(Broken({"i": [0]}), target)
    assert target.read_text() == "old"
    assert not _tmp_path(target).exists()


def test_write_atomic_csv_roundtrip(tmp_path: Path) -> None:
    df = pd.DataFrame({"i": [0, 1, 2], "p": [0, 1, 1], "count": [1, 3, 4]})
    target = tmp_path / "census.csv"
    write_atomic_csv(df, target)
    pd.testing.assert_frame_equal(pd.read_csv(target), df)


def test_tmp_path_has_tmp_suffix() -> None:
    assert _tmp_path(Path("/x/y/verify_quick.json")) == Path("/x/y/verify_quick.json.tmp")
    assert _tmp_path(Path("grid.csv")) == Path("grid.csv.tmp")


# ---------------------------------------------------------------------------
# Snapshots
# ---------------------------------------------------------------------------

def test_snapshot_name_uses_iso_timestamp() -> None:
    when = datetime(2026, 5, 27, 13, 35, 42, 123456)
    assert _snapshot_name(Path("verify_quick.json"), when=when) == "verify_quick_2026-05-27T13-35-42-123456.json"


def test_take_snapshot_copies_file(tmp_path: Path) -> None:
    src = tmp_path / "verify_quick.json"
    src.write_text("original")
    snap_dir = tmp_path / "snapshots"

    snap = take_snapshot(src, snap_dir)

    assert snap is not None
    assert snap.parent == snap_dir
    assert snap.read_text() == "original"
    assert src.read_text() == "original"


def test_take_snapshot_returns_none_when_source_missing(tmp_path: Path) -> None:
    assert take_snapshot(tmp_path / "missing.json", tmp_path / "snapshots") is None


def test_rotate_snapshots_keeps_newest_names(tmp_path: Path) -> None:
    snap_dir = tmp_path / "snapshots"
    snap_dir.mkdir()
    for i in range(10):
        (snap_dir / f"verify_quick_2026-05-27T13-{i:02d}-00-000000.json").write_text("x")
    (snap_dir / "census_2026-05-27T13-00-00-000000.json").write_text("other stem")

    removed = rotate_snapshots(snap_dir, stem="verify_quick", suffix=".json", keep=3)

    assert removed == 7
    remaining = sorted(p.name for p in snap_dir.glob("verify_quick_*.json"))
    assert [name[len("verify_quick_2026-05-27T13-"):][:2] for name in remaining] == ["07", "08", "09"]
    assert (snap_dir / "census_2026-05-27T13-00-00-000000.json").exists()


def test_rotate_snapshots_ignores_missing_dir(tmp_path: Path) -> None:
    assert rotate_snapshots(tmp_path / "nonexistent", "verify_quick", ".json") == 0


# ---------------------------------------------------------------------------
# write_report
# ---------------------------------------------------------------------------

def test_first_report_has_no_snapshot(tmp_path: Path) -> None:
    target = tmp_path / "verify_quick.json"
    result = write_report(target, "{}", snapshot_dir=tmp_path / "snapshots")
    assert result == {"snapshot": None, "rotated": 0}
    assert target.read_text() == "{}"


def test_second_report_snapshots_the_first(tmp_path: Path) -> None:
    target = tmp_path / "verify_quick.json"
    snap_dir = tmp_path / "snapshots"
    write_report(target, '{"run": 1}', snapshot_dir=snap_dir)

    result = write_report(target, '{"run": 2}', snapshot_dir=snap_dir)

    assert result["snapshot"] is not None
    assert json.loads(result["snapshot"].read_text()) == {"run": 1}
    assert json.loads(target.read_text()) == {"run": 2}


def test_report_snapshots_are_rotated(tmp_path: Path) -> None:
    target = tmp_path / "verify_quick.json"
    snap_dir = tmp_path / "snapshots"
    for run in range(6):
        write_report(target, json.dumps({"run": run}), snapshot_dir=snap_dir, keep_snapshots=2)
    assert len(list(snap_dir.glob("verify_quick_*.json"))) <= 2
    assert json.loads(target.read_text()) == {"run": 5}
