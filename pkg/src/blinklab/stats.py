"""Medically relevant blink statistics from classified events and series.

Totals, per-minute counts, frequencies, pooled blink-shape aggregates,
baseline EAR before the first blink, and blink-length moments per eye.
Events manually set to state "none" are excluded everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError
from .pipeline import BlinkEvent
from .series import EarSeries

# Seconds of baseline averaged before the first blink's onset.
BASELINE_WINDOW_S = 3.0


@dataclass(frozen=True)
class StatsReport:
    """The full statistics battery; None marks absent aggregates."""

    ear_before_blink_left_avg: Optional[float]
    ear_before_blink_right_avg: Optional[float]
    ear_left_min: Optional[float]
    ear_left_max: Optional[float]
    ear_right_min: Optional[float]
    ear_right_max: Optional[float]
    partial_threshold_left: Optional[float]
    partial_threshold_right: Optional[float]
    prominence_min: Optional[float]
    prominence_max: Optional[float]
    prominence_avg: Optional[float]
    width_min: Optional[float]
    width_max: Optional[float]
    width_avg: Optional[float]
    height_min: Optional[float]
    height_max: Optional[float]
    height_avg: Optional[float]
    partial_total_left: int
    partial_total_right: int
    partial_freq_left_bpm: float
    partial_freq_right_bpm: float
    complete_total_left: int
    complete_total_right: int
    complete_freq_left_bpm: float
    complete_freq_right_bpm: float
    blink_length_left_ms_avg: Optional[float]
    blink_length_left_ms_std: Optional[float]
    blink_length_right_ms_avg: Optional[float]
    blink_length_right_ms_std: Optional[float]
    per_minute_partial_left: Tuple[int, ...]
    per_minute_partial_right: Tuple[int, ...]
    per_minute_complete_left: Tuple[int, ...]
    per_minute_complete_right: Tuple[int, ...]


def _minute_count(n_frames: int, fps: float) -> int:
    return max(1, math.ceil(n_frames / fps / 60.0))


def _bucket(apex_frame: int, fps: float, n_minutes: int) -> int:
    return min(int(apex_frame / fps / 60.0), n_minutes - 1)


def _pool(values: Sequence[float]):
    if not values:
        return None, None, None
    arr = np.asarray(values, dtype=np.float64)
    lo, hi = float(arr.min()), float(arr.max())
    # summation round-off must not break the min <= avg <= max invariant
    return lo, hi, float(np.clip(arr.mean(), lo, hi))


def _baseline_ear(events: List[BlinkEvent], series: EarSeries) -> Optional[float]:
    if not events:
        return None
    first = min(events, key=lambda e: e.apex_frame)
    onset = first.onset_frame
    start = max(0, onset - int(round(BASELINE_WINDOW_S * series.fps)))
    window_valid = series.valid[start:onset]
    if not window_valid.any():
        return None
    return float(series.values[start:onset][window_valid].mean())


def compute_statistics(
    left_events: Sequence[BlinkEvent],
    right_events: Sequence[BlinkEvent],
    left_series: EarSeries,
    right_series: EarSeries,
    thresholds: Tuple[Optional[float], Optional[float]],
    fps: float,
) -> StatsReport:
    """Assemble the statistics report for one detection run.

    Baseline EAR averages the valid samples in the 3 s window ending at the
    first blink's onset (clamped at series start).  Shape aggregates pool
    both eyes; blink lengths, totals, and frequencies are per eye.  The last
    partial minute counts as a full per-minute bucket, while frequencies use
    the exact duration.
    """
    if not fps > 0:
        raise InvalidInputError(f"fps must be > 0, got {fps}")
    if len(left_series) != len(right_series):
        raise InvalidInputError("left and right series must have equal length")

    n = len(left_series)
    duration_min = n / fps / 60.0
    n_minutes = _minute_count(n, fps)

    counted = {
        "left": [e for e in left_events if e.state != "none"],
        "right": [e for e in right_events if e.state != "none"],
    }
    pooled = counted["left"] + counted["right"]
    prom_min, prom_max, prom_avg = _pool([e.prominence for e in pooled])
    width_min, width_max, width_avg = _pool([e.width_frames for e in pooled])
    height_min, height_max, height_avg = _pool([e.height for e in pooled])

    def ear_extrema(series: EarSeries):
        if not series.valid.any():
            return None, None
        vals = series.values[series.valid]
        return float(vals.min()), float(vals.max())

    ear_left_min, ear_left_max = ear_extrema(left_series)
    ear_right_min, ear_right_max = ear_extrema(right_series)

    def blink_lengths(events: List[BlinkEvent]):
        if not events:
            return None, None
        ms = np.asarray([e.width_frames / fps * 1000.0 for e in events])
        return float(ms.mean()), float(ms.std())  # population std: defined for n=1

    len_left_avg, len_left_std = blink_lengths(counted["left"])
    len_right_avg, len_right_std = blink_lengths(counted["right"])

    per_minute = {
        (eye, state): [0] * n_minutes
        for eye in ("left", "right")
        for state in ("partial", "complete")
    }
    totals = {(eye, state): 0 for eye in ("left", "right") for state in ("partial", "complete")}
    for eye in ("left", "right"):
        for event in counted[eye]:
            key = (eye, event.state)
            totals[key] += 1
            per_minute[key][_bucket(event.apex_frame, fps, n_minutes)] += 1

    def freq(total: int) -> float:
        return total / duration_min

    return StatsReport(
        ear_before_blink_left_avg=_baseline_ear(counted["left"], left_series),
        ear_before_blink_right_avg=_baseline_ear(counted["right"], right_series),
        ear_left_min=ear_left_min,
        ear_left_max=ear_left_max,
        ear_right_min=ear_right_min,
        ear_right_max=ear_right_max,
        partial_threshold_left=thresholds[0],
        partial_threshold_right=thresholds[1],
        prominence_min=prom_min,
        prominence_max=prom_max,
        prominence_avg=prom_avg,
        width_min=width_min,
        width_max=width_max,
        width_avg=width_avg,
        height_min=height_min,
        height_max=height_max,
        height_avg=height_avg,
        partial_total_left=totals[("left", "partial")],
        partial_total_right=totals[("right", "partial")],
        partial_freq_left_bpm=freq(totals[("left", "partial")]),
        partial_freq_right_bpm=freq(totals[("right", "partial")]),
        complete_total_left=totals[("left", "complete")],
        complete_total_right=totals[("right", "complete")],
        complete_freq_left_bpm=freq(totals[("left", "complete")]),
        complete_freq_right_bpm=freq(totals[("right", "complete")]),
        blink_length_left_ms_avg=len_left_avg,
        blink_length_left_ms_std=len_left_std,
        blink_length_right_ms_avg=len_right_avg,
        blink_length_right_ms_std=len_right_std,
        per_minute_partial_left=tuple(per_minute[("left", "partial")]),
        per_minute_partial_right=tuple(per_minute[("right", "partial")]),
        per_minute_complete_left=tuple(per_minute[("left", "complete")]),
        per_minute_complete_right=tuple(per_minute[("right", "complete")]),
    )


# (report field, exported name, unit); per-minute vectors are expanded below.
_SCALAR_ROWS = (
    ("ear_before_blink_left_avg", "EAR_Before_Blink_left_avg", "[0,1]"),
    ("ear_before_blink_right_avg", "EAR_Before_Blink_right_avg", "[0,1]"),
    ("ear_left_min", "EAR_left_min", "[0,1]"),
    ("ear_right_min", "EAR_right_min", "[0,1]"),
    ("ear_left_max", "EAR_left_max", "[0,1]"),
    ("ear_right_max", "EAR_right_max", "[0,1]"),
    ("partial_threshold_left", "Partial_Blink_threshold_left", "[0,1]"),
    ("partial_threshold_right", "Partial_Blink_threshold_right", "[0,1]"),
    ("prominence_min", "Prominence_min", "[0,1]"),
    ("prominence_max", "Prominence_max", "[0,1]"),
    ("prominence_avg", "Prominence_avg", "[0,1]"),
    ("width_min", "Width_min", "frames"),
    ("width_max", "Width_max", "frames"),
    ("width_avg", "Width_avg", "frames"),
    ("height_min", "Height_min", "[0,1]"),
    ("height_max", "Height_max", "[0,1]"),
    ("height_avg", "Height_avg", "[0,1]"),
    ("partial_total_left", "Partial_Blink_Total_left", "N"),
    ("partial_total_right", "Partial_Blink_Total_right", "N"),
    ("partial_freq_left_bpm", "Partial_Frequency_left_bpm", "1/min"),
    ("partial_freq_right_bpm", "Partial_Frequency_right_bpm", "1/min"),
    ("blink_length_left_ms_avg", "Blink_Length_left_ms_avg", "ms"),
    ("blink_length_left_ms_std", "Blink_Length_left_ms_std", "ms"),
    ("blink_length_right_ms_avg", "Blink_Length_right_ms_avg", "ms"),
    ("blink_length_right_ms_std", "Blink_Length_right_ms_std", "ms"),
)


def report_rows(report: StatsReport) -> List[Tuple[str, object, str]]:
    """(name, value, unit) rows in canonical order; absent values omitted.

    Per-minute vectors expand to one row per minute with a 1-based,
    zero-padded minute tag, e.g. Partial_Blinks_min01_left.
    """

    def minute_rows(vector: Tuple[int, ...], template: str):
        pad = max(2, len(str(len(vector))))
        return [
            (template.format(nn=str(i + 1).zfill(pad)), count, "N")
            for i, count in enumerate(vector)
        ]

    rows: List[Tuple[str, object, str]] = []
    for attr, name, unit in _SCALAR_ROWS:
        value = getattr(report, attr)
        if value is not None:
            rows.append((name, value, unit))
    rows.extend(minute_rows(report.per_minute_partial_left, "Partial_Blinks_min{nn}_left"))
    rows.extend(minute_rows(report.per_minute_partial_right, "Partial_Blinks_min{nn}_right"))
    rows.append(("Complete_Blink_Total_left", report.complete_total_left, "N"))
    rows.append(("Complete_Blink_Total_right", report.complete_total_right, "N"))
    rows.append(("Complete_Frequency_left_bpm", report.complete_freq_left_bpm, "1/min"))
    rows.append(("Complete_Frequency_right_bpm", report.complete_freq_right_bpm, "1/min"))
    rows.extend(minute_rows(report.per_minute_complete_left, "Complete_Blinks_min{nn}_left"))
    rows.extend(minute_rows(report.per_minute_complete_right, "Complete_Blinks_min{nn}_right"))
    return rows


def report_to_dict(report: StatsReport) -> Dict[str, object]:
    """The report as an ordered name -> value mapping (absent values omitted).

    This is the canonical wire form: floats are normalized to the exported
    9-significant-digit precision so the CLI's JSON and the review service
    serve identical numbers.
    """
    return {
        name: value if isinstance(value, int) else float(f"{value:.9g}")
        for name, value, _unit in report_rows(report)
    }
