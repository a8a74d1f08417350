"""File formats and exports: score CSV, landmark CSV, blink table, stats.

All writers are deterministic (same inputs give identical bytes) and the
file writer is atomic: output appears under its final name only once
complete.  Floats are printed with 9 significant digits.
"""

from __future__ import annotations

import csv
import io
import json
import os
import re
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .ear import EyeLandmarks, FramePair
from .errors import InvalidInputError, MissingColumnError
from .pipeline import BlinkEvent, BlinkMatch, DetectionParams
from .series import ColumnSelection, EarSeries, Source, _text_stream
from .stats import StatsReport, report_rows, report_to_dict

SCORE_COLUMNS_2D = ("EAR_2D_left", "EAR_2D_right")
SCORE_COLUMNS_3D = ("EAR_3D_left", "EAR_3D_right")

BLINK_HEADER = (
    "id,eye,apex_frame,apex_time_s,apex_ear,prominence,width_frames,height,"
    "onset_frame,offset_frame,state,state_source,match_id,delay_ms"
)


def fmt(value: float) -> str:
    """9-significant-digit float formatting shared by every CSV writer."""
    return f"{value:.9g}"


def atomic_write(path: Path, data: bytes) -> None:
    """Write via a temp file + rename so partial files never appear."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp, 0o666 & ~umask)  # mkstemp's 0600 would stick through rename
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# --- score files ----------------------------------------------------------


def export_scores(columns: Sequence[Tuple[str, EarSeries]]) -> bytes:
    """Score CSV bytes: frame column plus one column per named series."""
    if not columns:
        raise InvalidInputError("at least one series column required")
    n = len(columns[0][1])
    for name, series in columns:
        if len(series) != n:
            raise InvalidInputError(f"series length mismatch for column {name!r}")
    lines = ["frame," + ",".join(name for name, _ in columns)]
    for i in range(n):
        cells = [str(i)]
        for _, series in columns:
            cells.append(fmt(float(series.values[i])) if series.valid[i] else "")
        lines.append(",".join(cells))
    return ("\n".join(lines) + "\n").encode("utf-8")


# --- landmark files -------------------------------------------------------

_LM_COL_RE = re.compile(r"^([lr])([1-6])([xyz])$")


def load_landmarks_csv(source: Source) -> Tuple[List[FramePair], bool]:
    """Parse a landmark CSV into per-frame (left, right) EyeLandmarks.

    The header names columns L1x,L1y[,L1z],..,R6x.. (case-insensitive);
    frames with missing or unparsable coordinates for an eye yield None for
    that eye.  Returns the frames and whether depth (z) is present for all
    twelve points.
    """
    reader = csv.reader(_text_stream(source))
    try:
        headers = [h.strip() for h in next(reader)]
    except StopIteration:
        raise InvalidInputError("landmark CSV is empty") from None

    col: Dict[Tuple[str, int, str], int] = {}
    for i, name in enumerate(headers):
        m = _LM_COL_RE.match(name.lower())
        if m:
            col[(m.group(1), int(m.group(2)), m.group(3))] = i

    for eye in ("l", "r"):
        for p in range(1, 7):
            for axis in ("x", "y"):
                if (eye, p, axis) not in col:
                    raise MissingColumnError(f"{eye.upper()}{p}{axis}")
    has_z = all((eye, p, "z") in col for eye in ("l", "r") for p in range(1, 7))

    def parse_eye(row: List[str], eye: str) -> Optional[EyeLandmarks]:
        points = []
        axes = ("x", "y", "z") if has_z else ("x", "y")
        for p in range(1, 7):
            coords = []
            for axis in axes:
                i = col[(eye, p, axis)]
                cell = row[i].strip() if i < len(row) else ""
                if not cell:
                    return None
                try:
                    coords.append(float(cell))
                except ValueError:
                    return None
            points.append(tuple(coords))
        try:
            return EyeLandmarks(points=tuple(points))
        except InvalidInputError:
            return None

    frames: List[FramePair] = []
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        frames.append((parse_eye(row, "l"), parse_eye(row, "r")))
    if not frames:
        raise InvalidInputError("landmark CSV contains no data rows")
    return frames, has_z


def looks_like_landmark_header(headers: Sequence[str]) -> bool:
    return any(_LM_COL_RE.match(h.strip().lower()) for h in headers)


def sniff_headers(source: Source) -> List[str]:
    reader = csv.reader(_text_stream(source))
    try:
        return [h.strip() for h in next(reader)]
    except StopIteration:
        raise InvalidInputError("CSV is empty") from None


# --- blink table ----------------------------------------------------------


def export_blinks(
    left_events: Sequence[BlinkEvent],
    right_events: Sequence[BlinkEvent],
    matches: Sequence[BlinkMatch],
    fps: float,
) -> bytes:
    """Blink table CSV: one row per event with its match reference.

    Bilateral matches repeat the pair delay on both rows with the sign seen
    from that row's eye: + on the left row (time until the right apex), the
    negation on the right row.  Unilateral rows leave delay_ms blank.
    """
    if not fps > 0:
        raise InvalidInputError(f"fps must be > 0, got {fps}")
    match_of: Dict[int, Tuple[int, Optional[float]]] = {}
    for mi, match in enumerate(matches):
        if match.left_id is not None:
            match_of[match.left_id] = (mi, match.delay_ms)
        if match.right_id is not None:
            # + 0.0 normalizes -0.0 so a zero delay prints identically on both rows
            delay = (-match.delay_ms + 0.0) if match.delay_ms is not None else None
            match_of[match.right_id] = (mi, delay)

    lines = [BLINK_HEADER]
    events = sorted(
        list(left_events) + list(right_events),
        key=lambda e: (e.apex_frame, e.eye, e.id),
    )
    for e in events:
        mi, delay = match_of.get(e.id, ("", None))
        lines.append(
            ",".join(
                [
                    str(e.id),
                    e.eye,
                    str(e.apex_frame),
                    fmt(e.apex_frame / fps),
                    fmt(e.apex_ear),
                    fmt(e.prominence),
                    fmt(e.width_frames),
                    fmt(e.height),
                    str(e.onset_frame),
                    str(e.offset_frame),
                    e.state,
                    e.state_source,
                    str(mi),
                    fmt(delay) if delay is not None else "",
                ]
            )
        )
    return ("\n".join(lines) + "\n").encode("utf-8")


def load_blinks_csv(source: Source):
    """Reload an exported blink table into events and matches."""
    reader = csv.reader(_text_stream(source))
    headers = next(reader, None)
    if headers is None or [h.strip() for h in headers] != BLINK_HEADER.split(","):
        raise InvalidInputError("not a blink table CSV (unexpected header)")
    left_events, right_events = [], []
    pair_rows: Dict[int, Dict[str, Tuple[int, Optional[float]]]] = {}
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        event = BlinkEvent(
            id=int(row[0]),
            eye=row[1],
            apex_frame=int(row[2]),
            apex_ear=float(row[4]),
            prominence=float(row[5]),
            width_frames=float(row[6]),
            height=float(row[7]),
            onset_frame=int(row[8]),
            offset_frame=int(row[9]),
            state=row[10],
            state_source=row[11],
        )
        (left_events if event.eye == "left" else right_events).append(event)
        if row[12]:
            delay = float(row[13]) if row[13] else None
            pair_rows.setdefault(int(row[12]), {})[event.eye] = (event.id, delay)

    matches = []
    for mi in sorted(pair_rows):
        sides = pair_rows[mi]
        left = sides.get("left")
        right = sides.get("right")
        delay = left[1] if left and left[1] is not None else None
        matches.append(
            BlinkMatch(
                left_id=left[0] if left else None,
                right_id=right[0] if right else None,
                delay_ms=delay if (left and right) else None,
            )
        )
    return left_events, right_events, matches


# --- statistics -----------------------------------------------------------


def export_stats_csv(report: StatsReport) -> bytes:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")  # quotes the "[0,1]" unit
    writer.writerow(["statistic", "value", "unit"])
    for name, value, unit in report_rows(report):
        text = str(value) if isinstance(value, int) else fmt(float(value))
        writer.writerow([name, text, unit])
    return buffer.getvalue().encode("utf-8")


def export_stats_json(report: StatsReport) -> bytes:
    return (json.dumps(report_to_dict(report), indent=2) + "\n").encode("utf-8")


# --- run configuration ----------------------------------------------------

EMIT_CHOICES = ("blinks", "stats", "summary-svg", "summary-json")


@dataclass(frozen=True)
class RunConfig:
    """A resolved batch run: where input comes from, how to process, what to emit."""

    input_path: Path
    input_kind: str  # landmarks | scores
    fps: float
    out_dir: Path
    params: DetectionParams = field(default_factory=DetectionParams)
    columns: Optional[ColumnSelection] = None
    emit: Tuple[str, ...] = EMIT_CHOICES
    scatter_budget: int = 4000
    rolling_window_s: float = 5.0

    def __post_init__(self):
        if self.input_kind not in ("landmarks", "scores"):
            raise InvalidInputError(f"input_kind must be landmarks|scores, got {self.input_kind!r}")
        if not self.fps > 0:
            raise InvalidInputError(f"fps must be > 0, got {self.fps}")
        for e in self.emit:
            if e not in EMIT_CHOICES:
                raise InvalidInputError(f"unknown emit flag {e!r}")
