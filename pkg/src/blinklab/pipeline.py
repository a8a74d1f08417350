"""From EAR series to classified blink events and left/right matches.

Blinks are dips in the EAR signal, so detection runs on 1 - EAR and a
blink's "height" is the inverted value at the apex, a bounded [0, 1]
quantity.  Classification into partial/complete compares each blink's
prominence against a per-eye threshold, either user-provided or derived
from the blink population with Otsu's method.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateDistributionError, InvalidInputError
from .peaks import PeakParams, find_peaks
from .series import EarSeries, bridged_for_detection, smooth

BLINK_STATES = ("none", "partial", "complete")
STATE_SOURCES = ("auto", "manual")


def default_peak_params() -> PeakParams:
    """Detection defaults tuned for blink dips in EAR units."""
    return PeakParams(min_prominence=0.05, min_distance=15, min_width=3.0)


@dataclass(frozen=True)
class DetectionParams:
    """Everything the detection/classification/matching stages need.

    Peak thresholds are in inverted-signal units, which coincide with EAR
    units for prominence.  Manual thresholds apply when threshold_mode is
    "manual" and as the fallback when automatic thresholding degenerates.
    """

    peak: PeakParams = field(default_factory=default_peak_params)
    smoothing_window: Optional[int] = None
    threshold_mode: str = "auto"
    manual_threshold_left: Optional[float] = None
    manual_threshold_right: Optional[float] = None
    max_match_delay_ms: float = 500.0
    otsu_bins: int = 256

    def __post_init__(self):
        if self.threshold_mode not in ("auto", "manual"):
            raise InvalidInputError(f"threshold_mode must be auto|manual, got {self.threshold_mode!r}")
        for name in ("manual_threshold_left", "manual_threshold_right"):
            value = getattr(self, name)
            if value is not None and not 0.0 <= value <= 1.0:
                raise InvalidInputError(f"{name} must be in [0, 1], got {value}")
        if self.threshold_mode == "manual" and (
            self.manual_threshold_left is None or self.manual_threshold_right is None
        ):
            raise InvalidInputError("manual threshold_mode requires both per-eye thresholds")
        if not self.max_match_delay_ms > 0:
            raise InvalidInputError(f"max_match_delay_ms must be > 0, got {self.max_match_delay_ms}")
        if self.smoothing_window is not None and (
            self.smoothing_window < 1 or self.smoothing_window % 2 == 0
        ):
            raise InvalidInputError("smoothing_window must be a positive odd integer")
        if self.otsu_bins < 2:
            raise InvalidInputError(f"otsu_bins must be >= 2, got {self.otsu_bins}")


@dataclass(frozen=True)
class BlinkEvent:
    """One detected blink for one eye."""

    id: int
    eye: str
    apex_frame: int
    apex_ear: float
    prominence: float
    width_frames: float
    height: float
    onset_frame: int
    offset_frame: int
    state: str = "none"
    state_source: str = "auto"

    def __post_init__(self):
        if not self.onset_frame <= self.apex_frame <= self.offset_frame:
            raise InvalidInputError("blink onset/apex/offset out of order")
        if not self.prominence >= 0:
            raise InvalidInputError("blink prominence must be >= 0")
        if not np.isfinite(self.apex_ear):
            raise InvalidInputError("apex EAR must be finite")
        if self.state not in BLINK_STATES:
            raise InvalidInputError(f"state must be one of {BLINK_STATES}, got {self.state!r}")
        if self.state_source not in STATE_SOURCES:
            raise InvalidInputError(f"state_source must be one of {STATE_SOURCES}")


@dataclass(frozen=True)
class BlinkMatch:
    """A left/right pairing by apex time, or a unilateral leftover."""

    left_id: Optional[int]
    right_id: Optional[int]
    delay_ms: Optional[float]  # right apex time - left apex time

    def __post_init__(self):
        if self.left_id is None and self.right_id is None:
            raise InvalidInputError("match must reference at least one event")
        bilateral = self.left_id is not None and self.right_id is not None
        if bilateral != (self.delay_ms is not None):
            raise InvalidInputError("delay_ms present iff the match is bilateral")

    @property
    def bilateral(self) -> bool:
        return self.left_id is not None and self.right_id is not None


def extract_blinks(
    series: EarSeries, params: DetectionParams, id_start: int = 0
) -> List[BlinkEvent]:
    """Detect blink events in one eye's EAR series.

    Runs peak detection on the inverted (1 - EAR) signal, optionally after
    smoothing.  Invalid runs are bridged by interpolation for detection
    only; any blink whose apex lands on a bridged sample is discarded.
    States start as "none"; ids are ordinal from `id_start` in apex order.
    """
    if int(series.valid.sum()) < 3:
        raise InvalidInputError("series must contain at least 3 valid samples")
    if params.smoothing_window is not None:
        series = smooth(series, params.smoothing_window)
    bridged, synthetic = bridged_for_detection(series)
    inverted = 1.0 - bridged
    events = []
    for cand in find_peaks(inverted, params.peak):
        if synthetic[cand.index]:
            continue
        apex_ear = float(bridged[cand.index])
        events.append(
            BlinkEvent(
                id=id_start + len(events),
                eye=series.eye,
                apex_frame=cand.index,
                apex_ear=apex_ear,
                prominence=cand.prominence,
                width_frames=cand.width,
                height=cand.height,
                onset_frame=cand.left_base,
                offset_frame=cand.right_base,
            )
        )
    return events


def otsu_threshold(values: Sequence[float], bins: int = 256) -> float:
    """Threshold maximizing between-class variance over histogram bin edges.

    Candidate thresholds are the interior edges of `bins` equal-width bins
    spanning [min, max]; each edge splits the values into below/at-or-above
    classes.  Ties resolve to the lowest edge.  Raises
    DegenerateDistributionError when fewer than two distinct values exist.
    """
    vals = np.sort(np.asarray(values, dtype=np.float64))
    if len(vals) == 0:
        raise InvalidInputError("values must be non-empty")
    if not np.isfinite(vals).all():
        raise InvalidInputError("values must be finite")
    if vals[0] < 0.0 or vals[-1] > 1.0:
        raise InvalidInputError("values must lie in [0, 1]")
    if bins < 2:
        raise InvalidInputError(f"bins must be >= 2, got {bins}")
    vmin, vmax = float(vals[0]), float(vals[-1])
    step = (vmax - vmin) / bins
    if vmin == vmax or step == 0.0:
        raise DegenerateDistributionError("values are indistinguishable; no threshold exists")

    n = len(vals)
    csum = np.cumsum(vals)
    total = csum[-1]
    edges = vmin + step * np.arange(1, bins)
    w0 = np.searchsorted(vals, edges, side="left")  # count of values < edge
    variance = np.full(len(edges), -np.inf)
    usable = (w0 > 0) & (w0 < n)
    w0u = w0[usable]
    mu0 = csum[w0u - 1] / w0u
    mu1 = (total - csum[w0u - 1]) / (n - w0u)
    variance[usable] = w0u * (n - w0u) * (mu0 - mu1) ** 2
    best = int(np.argmax(variance))  # first max = lowest edge on ties
    return float(edges[best])


@dataclass(frozen=True)
class ThresholdResolution:
    """Per-eye partial/complete thresholds and how they were obtained."""

    left: Optional[float]
    right: Optional[float]
    warnings: Tuple[str, ...] = ()


def resolve_thresholds(
    left_events: Sequence[BlinkEvent],
    right_events: Sequence[BlinkEvent],
    params: DetectionParams,
) -> ThresholdResolution:
    """Derive the per-eye classification thresholds from params and events.

    Auto mode runs Otsu's method on each eye's blink prominences
    individually; a degenerate distribution falls back to the manual
    threshold when provided, else leaves the eye thresholdless (all blinks
    classify as complete) with a warning.
    """
    manual = {"left": params.manual_threshold_left, "right": params.manual_threshold_right}
    if params.threshold_mode == "manual":
        return ThresholdResolution(left=manual["left"], right=manual["right"])

    resolved = {}
    warnings = []
    for eye, events in (("left", left_events), ("right", right_events)):
        proms = [e.prominence for e in events]
        if not proms:
            resolved[eye] = None
            continue
        try:
            resolved[eye] = otsu_threshold(proms, bins=params.otsu_bins)
        except DegenerateDistributionError:
            if manual[eye] is not None:
                resolved[eye] = manual[eye]
                warnings.append(
                    f"automatic threshold degenerate for {eye} eye; using manual threshold"
                )
            else:
                resolved[eye] = None
                warnings.append(
                    f"automatic threshold degenerate for {eye} eye; all blinks marked complete"
                )
    return ThresholdResolution(
        left=resolved["left"], right=resolved["right"], warnings=tuple(warnings)
    )


def classify_blinks(
    events: Sequence[BlinkEvent],
    left_threshold: Optional[float],
    right_threshold: Optional[float],
    reset_manual: bool = False,
) -> List[BlinkEvent]:
    """Set each event's state from its prominence and its eye's threshold.

    Prominence at or above the threshold means complete, below means
    partial; a missing (degenerate) threshold marks everything complete.
    Manually set states are preserved unless reset_manual is given.
    """
    for name, threshold in (("left", left_threshold), ("right", right_threshold)):
        if threshold is not None and not 0.0 <= threshold <= 1.0:
            raise InvalidInputError(f"{name} threshold must be in [0, 1], got {threshold}")
    out = []
    for event in events:
        if event.state_source == "manual" and not reset_manual:
            out.append(event)
            continue
        threshold = left_threshold if event.eye == "left" else right_threshold
        state = "complete" if threshold is None or event.prominence >= threshold else "partial"
        out.append(replace(event, state=state, state_source="auto"))
    return out


def set_blink_state(
    events: Sequence[BlinkEvent], event_id: int, new_state: str
) -> List[BlinkEvent]:
    """Manually override one event's state; all other fields are untouched."""
    if new_state not in BLINK_STATES:
        raise InvalidInputError(f"state must be one of {BLINK_STATES}, got {new_state!r}")
    out = list(events)
    for i, event in enumerate(out):
        if event.id == event_id:
            out[i] = replace(event, state=new_state, state_source="manual")
            return out
    raise InvalidInputError(f"no event with id {event_id}")


def match_blinks(
    left_events: Sequence[BlinkEvent],
    right_events: Sequence[BlinkEvent],
    fps: float,
    max_match_delay_ms: float = 500.0,
) -> List[BlinkMatch]:
    """Pair left and right blinks by apex-time proximity.

    Greedy mutual-nearest pairing: repeatedly bind the globally closest
    unpaired left/right pair whose apex delay is within the window, ties
    resolving to the earlier left apex (then earlier right apex).  Events
    left over become unilateral matches.  Output is ordered by apex time.
    """
    if not fps > 0:
        raise InvalidInputError(f"fps must be > 0, got {fps}")
    if not max_match_delay_ms > 0:
        raise InvalidInputError("max_match_delay_ms must be > 0")

    def t_ms(event: BlinkEvent) -> float:
        return event.apex_frame / fps * 1000.0

    candidates = []
    for le in left_events:
        for re_ in right_events:
            delay = t_ms(re_) - t_ms(le)
            if abs(delay) <= max_match_delay_ms:
                candidates.append((abs(delay), le.apex_frame, re_.apex_frame, le, re_))
    candidates.sort(key=lambda c: (c[0], c[1], c[2]))

    paired_left, paired_right = set(), set()
    matches = []
    for _, _, _, le, re_ in candidates:
        if le.id in paired_left or re_.id in paired_right:
            continue
        paired_left.add(le.id)
        paired_right.add(re_.id)
        matches.append(
            (le.apex_frame, 0, BlinkMatch(left_id=le.id, right_id=re_.id, delay_ms=t_ms(re_) - t_ms(le)))
        )
    for le in left_events:
        if le.id not in paired_left:
            matches.append((le.apex_frame, 0, BlinkMatch(left_id=le.id, right_id=None, delay_ms=None)))
    for re_ in right_events:
        if re_.id not in paired_right:
            matches.append((re_.apex_frame, 1, BlinkMatch(left_id=None, right_id=re_.id, delay_ms=None)))
    matches.sort(key=lambda m: (m[0], m[1]))
    return [m[2] for m in matches]


@dataclass(frozen=True)
class DetectionResult:
    """Everything one detection run produces for a session or export."""

    left_events: Tuple[BlinkEvent, ...]
    right_events: Tuple[BlinkEvent, ...]
    matches: Tuple[BlinkMatch, ...]
    threshold_left: Optional[float]
    threshold_right: Optional[float]
    warnings: Tuple[str, ...]

    @property
    def events(self) -> List[BlinkEvent]:
        return list(self.left_events) + list(self.right_events)


def detect_pair(
    left_series: EarSeries, right_series: EarSeries, params: DetectionParams
) -> DetectionResult:
    """Extract, classify, and match blinks for both eyes.

    Event ids are globally unique across the pair: left events first, right
    events continuing the sequence.
    """
    left_events = extract_blinks(left_series, params, id_start=0)
    right_events = extract_blinks(right_series, params, id_start=len(left_events))
    thresholds = resolve_thresholds(left_events, right_events, params)
    left_events = classify_blinks(left_events, thresholds.left, thresholds.right)
    right_events = classify_blinks(right_events, thresholds.left, thresholds.right)
    matches = match_blinks(
        left_events, right_events, left_series.fps, params.max_match_delay_ms
    )
    return DetectionResult(
        left_events=tuple(left_events),
        right_events=tuple(right_events),
        matches=tuple(matches),
        threshold_left=thresholds.left,
        threshold_right=thresholds.right,
        warnings=thresholds.warnings,
    )
