"""Per-eye EAR time series: container, score-file ingestion, smoothing.

A score file is a plain CSV with a header row and one row per video frame.
Frame timing is not stored in the file; the caller supplies the FPS.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from typing import IO, Optional, Sequence, Union

import numpy as np

from .errors import InvalidInputError, MissingColumnError

EYES = ("left", "right")

Source = Union[bytes, str, IO[bytes], IO[str]]


@dataclass(frozen=True)
class EarSeries:
    """EAR samples for one eye at a fixed frame rate.

    ``values[i]`` is the EAR score of frame ``i``; ``valid[i]`` marks whether
    that sample is usable.  Invalid samples keep their slot so frame indexing
    is preserved, but their value carries no meaning (typically NaN).
    """

    values: np.ndarray
    valid: np.ndarray
    fps: float
    eye: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        valid = np.asarray(self.valid, dtype=bool)
        if values.ndim != 1 or valid.ndim != 1 or len(values) != len(valid):
            raise InvalidInputError("values and valid must be 1-D and equal length")
        if not self.fps > 0:
            raise InvalidInputError(f"fps must be > 0, got {self.fps}")
        if self.eye not in EYES:
            raise InvalidInputError(f"eye must be one of {EYES}, got {self.eye!r}")
        if valid.any() and not np.isfinite(values[valid]).all():
            raise InvalidInputError("valid samples must be finite")
        values.flags.writeable = False
        valid.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)
        object.__setattr__(self, "fps", float(self.fps))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def duration_s(self) -> float:
        return len(self.values) / self.fps

    def times(self) -> np.ndarray:
        """Sample times in seconds."""
        return np.arange(len(self.values)) / self.fps


@dataclass(frozen=True)
class ColumnSelection:
    """Names of the score-file columns holding the left and right eye."""

    left_column: str
    right_column: str

    def __post_init__(self):
        if self.left_column == self.right_column:
            raise InvalidInputError("left and right columns must differ")


# Words are split on non-alphanumeric characters, camel-case transitions,
# and letter/digit boundaries, so "EAR2D6_l" yields ear/2/d/6/l.
_WORD_RE = re.compile(r"[A-Z]+(?![a-z])|[A-Z][a-z]+|[a-z]+|[0-9]+")

_LEFT_TOKENS = {"left", "l"}
_RIGHT_TOKENS = {"right", "r"}


def _tokens(name: str) -> set:
    out = set()
    for chunk in re.split(r"[^0-9A-Za-z]+", name):
        for m in _WORD_RE.finditer(chunk):
            out.add(m.group(0).lower())
    return out


def auto_select_columns(headers: Sequence[str]) -> Optional[ColumnSelection]:
    """Pick left/right EAR columns from a score-file header.

    A column qualifies for a side when its name tokenizes to an "ear" token
    plus a side token ("left"/"l" or "right"/"r"); the first qualifying
    header wins for each side.  Returns None when either side stays
    unmatched or both sides resolve to the same ambiguous column.
    """
    if not headers:
        raise InvalidInputError("headers must be non-empty")
    left = right = None
    for name in headers:
        toks = _tokens(name)
        if "ear" not in toks:
            continue
        if left is None and toks & _LEFT_TOKENS:
            left = name
        if right is None and toks & _RIGHT_TOKENS:
            right = name
    if left is None or right is None or left == right:
        return None
    return ColumnSelection(left_column=left, right_column=right)


def _text_stream(source: Source) -> IO[str]:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"))
    if isinstance(source, str):
        return io.StringIO(source)
    if isinstance(source.read(0), bytes):  # type: ignore[union-attr]
        return io.TextIOWrapper(source, encoding="utf-8")  # type: ignore[arg-type]
    return source  # type: ignore[return-value]


def _parse_cell(cell: str) -> float:
    cell = cell.strip()
    if not cell:
        return np.nan
    try:
        value = float(cell)
    except ValueError:
        return np.nan
    return value


def load_score_csv(source: Source, selection: ColumnSelection, fps: float):
    """Load a score CSV into a (left, right) pair of EarSeries.

    Empty cells and non-finite numbers become invalid samples; row count is
    preserved so frame indices stay aligned with the file.
    """
    if not fps > 0:
        raise InvalidInputError(f"fps must be > 0, got {fps}")
    reader = csv.reader(_text_stream(source))
    try:
        headers = next(reader)
    except StopIteration:
        raise InvalidInputError("score CSV is empty") from None
    headers = [h.strip() for h in headers]
    try:
        li = headers.index(selection.left_column)
    except ValueError:
        raise MissingColumnError(selection.left_column) from None
    try:
        ri = headers.index(selection.right_column)
    except ValueError:
        raise MissingColumnError(selection.right_column) from None

    left_vals, right_vals = [], []
    for row in reader:
        if not row or all(not c.strip() for c in row):
            continue
        left_vals.append(_parse_cell(row[li]) if li < len(row) else np.nan)
        right_vals.append(_parse_cell(row[ri]) if ri < len(row) else np.nan)
    if not left_vals:
        raise InvalidInputError("score CSV contains no data rows")

    def build(vals, eye):
        arr = np.asarray(vals, dtype=np.float64)
        valid = np.isfinite(arr)
        return EarSeries(values=arr, valid=valid, fps=fps, eye=eye)

    return build(left_vals, "left"), build(right_vals, "right")


def smooth(series: EarSeries, window: int) -> EarSeries:
    """Centered moving average over valid samples; invalid samples stay invalid.

    The window must be odd; edges use the truncated window.  window=1 is the
    identity.
    """
    if not isinstance(window, (int, np.integer)) or window < 1 or window % 2 == 0:
        raise InvalidInputError(f"window must be a positive odd integer, got {window}")
    if window == 1:
        return series
    n = len(series)
    half = window // 2
    vals = np.where(series.valid, series.values, 0.0)
    cnt = series.valid.astype(np.int64)
    csum = np.concatenate(([0.0], np.cumsum(vals)))
    ccnt = np.concatenate(([0], np.cumsum(cnt)))
    idx = np.arange(n)
    lo = np.maximum(0, idx - half)
    hi = np.minimum(n, idx + half + 1)
    sums = csum[hi] - csum[lo]
    counts = ccnt[hi] - ccnt[lo]
    out = np.full(n, np.nan)
    ok = series.valid  # every valid sample includes itself, so counts >= 1 there
    out[ok] = sums[ok] / counts[ok]
    if ok.any():
        # cumsum round-off must not push a mean outside the data range
        out[ok] = np.clip(out[ok], series.values[ok].min(), series.values[ok].max())
    return EarSeries(values=out, valid=series.valid.copy(), fps=series.fps, eye=series.eye)


def bridged_for_detection(series: EarSeries):
    """Gap-free copy of the series for peak detection.

    Invalid runs are bridged by linear interpolation between the nearest
    valid neighbors (edges hold the nearest valid value).  Returns the
    bridged values and a mask of the synthesized samples; detections whose
    apex lies on a synthesized sample must be discarded by the caller.
    The original series is never modified.
    """
    valid_idx = np.flatnonzero(series.valid)
    if len(valid_idx) == 0:
        raise InvalidInputError("series has no valid samples")
    bridged = np.interp(
        np.arange(len(series)), valid_idx, series.values[valid_idx]
    )
    return bridged, ~series.valid
