"""
Atomic file writes and rolling snapshots for charstrat reports.

A verify report or census table is replaced only once its new contents
are fully on disk: each writer fills ``<path>.tmp`` and renames it over
the destination, and a failed write removes the staging file and leaves
the old report in place.  ``write_report`` also copies the outgoing
report to ``<snapshot_dir>/<stem>_<timestamp><ext>`` and prunes that
directory to the newest ``SNAPSHOTS_TO_KEEP`` copies per report.

Errors propagate; the CLI turns them into exit codes.
"""
from __future__ import annotations

import logging
import shutil
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path
from typing import Iterator

import pandas as pd

from config import SNAPSHOT_DIR, SNAPSHOTS_TO_KEEP

logger = logging.getLogger(__name__)

_STAMP = "%Y-%m-%dT%H-%M-%S-%f"


# ---------------------------------------------------------------------------
# Atomic writes
# ---------------------------------------------------------------------------

def _tmp_path(path: Path) -> Path:
    return path.with_name(path.name + ".tmp")


@contextmanager
def _staged(path: Path | str) -> Iterator[Path]:
    """Yield a staging file next to *path*; rename it into place on success."""
    dest = Path(path)
    dest.parent.mkdir(parents=True, exist_ok=True)
    staging = _tmp_path(dest)
    try:
        yield staging
    except BaseException:
        staging.unlink(missing_ok=True)
        raise
    staging.replace(dest)


def write_atomic_text(path: Path, text: str, encoding: str = "utf-8") -> None:
    """Stage *text* beside *path* and rename it into place."""
    with _staged(path) as staging:
        staging.write_text(text, encoding=encoding)


def write_atomic_csv(df: pd.DataFrame, path: Path, **to_csv_kwargs) -> None:
    """Census and grid tables: CSV without the index column."""
    with _staged(path) as staging:
        df.to_csv(staging, index=False, **to_csv_kwargs)


# ---------------------------------------------------------------------------
# Snapshots
# ---------------------------------------------------------------------------

def _snapshot_name(path: Path, when: datetime | None = None) -> str:
    stamp = (when or datetime.now()).strftime(_STAMP)
    return f"{path.stem}_{stamp}{path.suffix}"


def take_snapshot(path: Path, snapshot_dir: Path) -> Path | None:
    """Copy an existing report aside; ``None`` on a first run."""
    path = Path(path)
    if not path.is_file():
        return None
    snapshot_dir.mkdir(parents=True, exist_ok=True)
    copy = Path(shutil.copy2(path, snapshot_dir / _snapshot_name(path)))
    logger.debug(f"Snapshot of {path.name} saved as {copy.name}")
    return copy


def rotate_snapshots(snapshot_dir: Path, stem: str, suffix: str, keep: int = SNAPSHOTS_TO_KEEP) -> int:
    """Delete all but the *keep* newest snapshots of one report; return the count deleted."""
    if not snapshot_dir.is_dir():
        return 0
    # timestamps sort lexicographically, so name order is age order
    snaps = sorted(snapshot_dir.glob(f"{stem}_*{suffix}"), key=lambda p: p.name)
    stale = snaps[:max(len(snaps) - keep, 0)]
    deleted = 0
    for snap in stale:
        try:
            snap.unlink()
        except OSError as exc:
            logger.warning(f"Snapshot {snap.name} not rotated: {exc}")
            continue
        deleted += 1
    return deleted


def write_report(path: Path, text: str, snapshot_dir: Path | None = None,
                 keep_snapshots: int = SNAPSHOTS_TO_KEEP) -> dict:
    """Replace a report atomically after snapshotting its previous version.

    Returns ``{"snapshot": Path | None, "rotated": int}``.
    """
    path = Path(path)
    where = SNAPSHOT_DIR if snapshot_dir is None else Path(snapshot_dir)
    previous = take_snapshot(path, where)
    write_atomic_text(path, text)
    return {
        "snapshot": previous,
        "rotated": rotate_snapshots(where, path.stem, path.suffix, keep=keep_snapshots),
    }
