"""Blink analysis for high-FPS eye-aspect-ratio time series.

From per-frame eye landmarks or EAR score files to detected blink events,
partial/complete classification, left/right matching, clinical statistics,
and a visual summary, plus a batch CLI and a review HTTP service.
"""

from .ear import EyeLandmarks, compute_ear_2d, compute_ear_3d, ear_series_from_landmarks
from .errors import (
    BlinkError,
    DegenerateDistributionError,
    DegenerateGeometryError,
    InvalidInputError,
    MissingColumnError,
)
from .peaks import PeakCandidate, PeakParams, find_peaks
from .pipeline import (
    BlinkEvent,
    BlinkMatch,
    DetectionParams,
    DetectionResult,
    classify_blinks,
    detect_pair,
    extract_blinks,
    match_blinks,
    otsu_threshold,
    resolve_thresholds,
    set_blink_state,
)
from .series import (
    ColumnSelection,
    EarSeries,
    auto_select_columns,
    load_score_csv,
    smooth,
)
from .stats import StatsReport, compute_statistics, report_rows, report_to_dict
from .summary import SummaryBundle, build_summary, render_summary_svg, rolling_stats

__version__ = "0.1.0"

__all__ = [
    "BlinkError",
    "BlinkEvent",
    "BlinkMatch",
    "ColumnSelection",
    "DegenerateDistributionError",
    "DegenerateGeometryError",
    "DetectionParams",
    "DetectionResult",
    "EarSeries",
    "EyeLandmarks",
    "InvalidInputError",
    "MissingColumnError",
    "PeakCandidate",
    "PeakParams",
    "StatsReport",
    "SummaryBundle",
    "auto_select_columns",
    "build_summary",
    "classify_blinks",
    "compute_ear_2d",
    "compute_ear_3d",
    "compute_statistics",
    "detect_pair",
    "ear_series_from_landmarks",
    "extract_blinks",
    "find_peaks",
    "load_score_csv",
    "match_blinks",
    "otsu_threshold",
    "render_summary_svg",
    "report_rows",
    "report_to_dict",
    "resolve_thresholds",
    "rolling_stats",
    "set_blink_state",
    "smooth",
]
