"""Visual summary data and SVG rendering.

The bundle is the machine-readable side: downsampled EAR scatter with
rolling mean/std per eye, blink markers, per-minute blink counts, and the
left/right delay histogram.  The SVG renderer is deterministic: identical
bundles produce byte-identical documents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

from .errors import InvalidInputError
from .pipeline import BlinkEvent, BlinkMatch
from .series import EarSeries

LEFT_COLOR = "#1f77b4"  # left eye drawn blue, right red
RIGHT_COLOR = "#d62728"

DELAY_BIN_MS = 10.0


def rolling_stats(series: EarSeries, window: int) -> Tuple[np.ndarray, np.ndarray]:
    """Centered rolling mean and population std over valid samples.

    The window covers [i - (window-1)//2, i + window//2], truncated at the
    edges; positions whose window holds no valid sample yield NaN.  Output
    length equals the input length.
    """
    if not isinstance(window, (int, np.integer)) or window < 1:
        raise InvalidInputError(f"window must be a positive integer, got {window}")
    n = len(series)
    # shifted-data cumsums: anchoring at the first valid sample avoids the
    # catastrophic cancellation that would give a constant series std ~1e-8
    shift = float(series.values[series.valid][0]) if series.valid.any() else 0.0
    vals = np.where(series.valid, series.values - shift, 0.0)
    sq = vals * vals
    cnt = series.valid.astype(np.int64)
    csum = np.concatenate(([0.0], np.cumsum(vals)))
    csq = np.concatenate(([0.0], np.cumsum(sq)))
    ccnt = np.concatenate(([0], np.cumsum(cnt)))
    idx = np.arange(n)
    lo = np.maximum(0, idx - (window - 1) // 2)
    hi = np.minimum(n, idx + window // 2 + 1)
    counts = ccnt[hi] - ccnt[lo]
    mean = np.full(n, np.nan)
    std = np.full(n, np.nan)
    ok = counts > 0
    shifted_mean = (csum[hi] - csum[lo])[ok] / counts[ok]
    mean[ok] = shifted_mean + shift
    var = (csq[hi] - csq[lo])[ok] / counts[ok] - shifted_mean**2
    std[ok] = np.sqrt(np.maximum(var, 0.0))  # clamp cumsum round-off
    return mean, std


@dataclass(frozen=True)
class SeriesTrace:
    """A downsampled (time, value) polyline for one eye."""

    time_s: Tuple[float, ...]
    value: Tuple[float, ...]


@dataclass(frozen=True)
class BlinkMarker:
    time_s: float
    apex_ear: float
    state: str
    eye: str


@dataclass(frozen=True)
class SummaryBundle:
    """Machine-readable summary; the UI and the SVG renderer both feed on it."""

    scatter: Dict[str, SeriesTrace]
    rolling_mean: Dict[str, SeriesTrace]
    rolling_std: Dict[str, SeriesTrace]
    markers: Tuple[BlinkMarker, ...]
    blinks_per_minute: Tuple[int, ...]
    delay_bin_edges_ms: Tuple[float, ...]
    delay_counts: Tuple[int, ...]
    fps: float
    duration_s: float

    def to_json_dict(self) -> dict:
        def trace(t: SeriesTrace) -> dict:
            return {"time_s": list(t.time_s), "value": list(t.value)}

        return {
            "scatter": {eye: trace(t) for eye, t in self.scatter.items()},
            "rolling_mean": {eye: trace(t) for eye, t in self.rolling_mean.items()},
            "rolling_std": {eye: trace(t) for eye, t in self.rolling_std.items()},
            "markers": [
                {
                    "time_s": m.time_s,
                    "apex_ear": m.apex_ear,
                    "state": m.state,
                    "eye": m.eye,
                }
                for m in self.markers
            ],
            "blinks_per_minute": list(self.blinks_per_minute),
            "delay_histogram": {
                "bin_edges_ms": list(self.delay_bin_edges_ms),
                "counts": list(self.delay_counts),
            },
            "fps": self.fps,
            "duration_s": self.duration_s,
        }


def _downsample_indices(n: int, valid: np.ndarray, budget: int) -> np.ndarray:
    stride = max(1, math.ceil(n / budget))
    idx = np.arange(0, n, stride)
    valid_idx = np.flatnonzero(valid)
    if len(valid_idx):
        # keep the series endpoints visible regardless of stride
        idx = np.union1d(idx, [valid_idx[0], valid_idx[-1]])
    return idx[valid[idx]]


def build_summary(
    left_series: EarSeries,
    right_series: EarSeries,
    events: Sequence[BlinkEvent],
    matches: Sequence[BlinkMatch],
    fps: float,
    scatter_budget: int = 4000,
    rolling_window_s: float = 5.0,
    max_match_delay_ms: float = 500.0,
) -> SummaryBundle:
    """Assemble the summary bundle for one detection run.

    Scatter points are uniformly strided to at most `scatter_budget` per
    eye.  Blinks-per-minute counts matches: bilateral ones by the left apex
    minute, unilateral ones by their single eye's apex.  The delay histogram
    spans [-max_match_delay_ms, +max_match_delay_ms] in fixed 10 ms bins.
    """
    if not fps > 0:
        raise InvalidInputError(f"fps must be > 0, got {fps}")
    if scatter_budget < 1000:
        raise InvalidInputError(f"scatter_budget must be >= 1000, got {scatter_budget}")
    if len(left_series) != len(right_series):
        raise InvalidInputError("left and right series must have equal length")

    n = len(left_series)
    window = max(1, int(round(rolling_window_s * fps)))
    by_id = {e.id: e for e in events}

    scatter, r_mean, r_std = {}, {}, {}
    for series in (left_series, right_series):
        idx = _downsample_indices(n, series.valid, scatter_budget)
        times = tuple((idx / fps).tolist())
        scatter[series.eye] = SeriesTrace(times, tuple(series.values[idx].tolist()))
        mean, std = rolling_stats(series, window)
        r_mean[series.eye] = SeriesTrace(times, tuple(mean[idx].tolist()))
        r_std[series.eye] = SeriesTrace(times, tuple(std[idx].tolist()))

    markers = tuple(
        BlinkMarker(
            time_s=e.apex_frame / fps, apex_ear=e.apex_ear, state=e.state, eye=e.eye
        )
        for e in sorted(events, key=lambda e: (e.apex_frame, e.eye, e.id))
        if e.state != "none"
    )

    n_minutes = max(1, math.ceil(n / fps / 60.0))
    bpm = [0] * n_minutes
    delays = []
    for match in matches:
        if match.bilateral:
            anchor = by_id[match.left_id]
            delays.append(match.delay_ms)
        else:
            anchor = by_id[match.left_id if match.left_id is not None else match.right_id]
        bpm[min(int(anchor.apex_frame / fps / 60.0), n_minutes - 1)] += 1

    n_bins = max(1, math.ceil(2.0 * max_match_delay_ms / DELAY_BIN_MS))
    edges = -max_match_delay_ms + DELAY_BIN_MS * np.arange(n_bins + 1)
    counts, _ = np.histogram(np.asarray(delays, dtype=np.float64), bins=edges)

    return SummaryBundle(
        scatter=scatter,
        rolling_mean=r_mean,
        rolling_std=r_std,
        markers=markers,
        blinks_per_minute=tuple(bpm),
        delay_bin_edges_ms=tuple(edges.tolist()),
        delay_counts=tuple(int(c) for c in counts),
        fps=fps,
        duration_s=n / fps,
    )


# --- SVG rendering -------------------------------------------------------

_W, _H = 1060, 640
_MAIN = (64, 200, 760, 600)  # x0, y0, x1, y1
_TOP = (64, 36, 760, 176)
_SIDE = (820, 200, 1030, 600)


def _f(x: float) -> str:
    return f"{x:.3f}".rstrip("0").rstrip(".")


class _Svg:
    def __init__(self):
        self.parts: List[str] = []

    def add(self, tag: str, body: Optional[str] = None, **attrs):
        rendered = " ".join(f'{k.replace("_", "-")}="{v}"' for k, v in attrs.items())
        if body is None:
            self.parts.append(f"<{tag} {rendered}/>")
        else:
            self.parts.append(f"<{tag} {rendered}>{escape(body)}</{tag}>")

    def text(self, x, y, s, size=11, anchor="middle", color="#333333"):
        self.add(
            "text", s, x=_f(x), y=_f(y), font_size=size, text_anchor=anchor,
            fill=color, font_family="sans-serif",
        )


def _scale(lo_v, hi_v, lo_p, hi_p):
    span = hi_v - lo_v
    if span == 0:
        span = 1.0
    return lambda v: lo_p + (v - lo_v) / span * (hi_p - lo_p)


def _nice_ticks(lo: float, hi: float, n: int = 6) -> List[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min(s for s in (1 * mag, 2 * mag, 5 * mag, 10 * mag) if s >= raw)
    start = math.ceil(lo / step) * step
    ticks = []
    t = start
    while t <= hi + step * 1e-9:
        ticks.append(round(t, 12))
        t += step
    return ticks


def render_summary_svg(bundle: SummaryBundle) -> bytes:
    """Deterministic SVG 1.1 document for the summary bundle."""
    svg = _Svg()
    svg.parts.append(
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
        f'width="{_W}" height="{_H}" viewBox="0 0 {_W} {_H}">'
    )
    svg.add("rect", x=0, y=0, width=_W, height=_H, fill="#ffffff")
    svg.text((_MAIN[0] + _MAIN[2]) / 2, 20, "Blink summary", size=15)

    duration = max(bundle.duration_s, 1e-9)
    x0, y0, x1, y1 = _MAIN
    sx = _scale(0.0, duration, x0, x1)
    all_vals = [v for t in bundle.scatter.values() for v in t.value if math.isfinite(v)]
    vmax = max([0.5] + [v for v in all_vals]) * 1.05
    sy = _scale(0.0, vmax, y1, y0)

    # main panel: axes, scatter, rolling mean line and +/- std band, markers
    svg.add("rect", x=x0, y=y0, width=x1 - x0, height=y1 - y0, fill="none",
            stroke="#888888", stroke_width=1)
    for t in _nice_ticks(0.0, duration):
        px = sx(t)
        svg.add("line", x1=_f(px), y1=_f(y1), x2=_f(px), y2=_f(y1 + 4),
                stroke="#888888", stroke_width=1)
        svg.text(px, y1 + 16, _f(t))
    svg.text((x0 + x1) / 2, y1 + 32, "time [s]")
    for v in _nice_ticks(0.0, vmax, 5):
        py = sy(v)
        svg.add("line", x1=_f(x0 - 4), y1=_f(py), x2=_f(x0), y2=_f(py),
                stroke="#888888", stroke_width=1)
        svg.text(x0 - 8, py + 3, _f(v), anchor="end")
    svg.text(x0 - 44, (y0 + y1) / 2, "EAR")

    for eye, color in (("left", LEFT_COLOR), ("right", RIGHT_COLOR)):
        trace = bundle.scatter.get(eye)
        if trace is None:
            continue
        for t, v in zip(trace.time_s, trace.value):
            if math.isfinite(v):
                svg.add("circle", cx=_f(sx(t)), cy=_f(sy(v)), r="1.1",
                        fill=color, fill_opacity="0.35", **{"class": f"scatter {eye}"})
        mean = bundle.rolling_mean.get(eye)
        std = bundle.rolling_std.get(eye)
        if mean and std:
            pts = [
                (t, m, s)
                for t, m, s in zip(mean.time_s, mean.value, std.value)
                if math.isfinite(m) and math.isfinite(s)
            ]
            if pts:
                upper = [f"{_f(sx(t))},{_f(sy(m + s))}" for t, m, s in pts]
                lower = [f"{_f(sx(t))},{_f(sy(m - s))}" for t, m, s in reversed(pts)]
                svg.add("polygon", points=" ".join(upper + lower), fill=color,
                        fill_opacity="0.12", stroke="none",
                        **{"class": f"rolling-band {eye}"})
                line = " ".join(f"{_f(sx(t))},{_f(sy(m))}" for t, m, _ in pts)
                svg.add("polyline", points=line, fill="none", stroke=color,
                        stroke_width="1.2", **{"class": f"rolling-mean {eye}"})

    for m in bundle.markers:
        color = LEFT_COLOR if m.eye == "left" else RIGHT_COLOR
        cx, cy = sx(m.time_s), sy(m.apex_ear)
        cls = f"blink-marker {m.state} {m.eye}"
        if m.state == "complete":
            svg.add("circle", cx=_f(cx), cy=_f(cy), r="3", fill=color,
                    **{"class": cls})
        else:
            path = f"M {_f(cx)} {_f(cy - 4)} L {_f(cx - 3.5)} {_f(cy + 3)} L {_f(cx + 3.5)} {_f(cy + 3)} Z"
            svg.add("path", d=path, fill=color, **{"class": cls})

    # top panel: blinks per minute
    x0, y0, x1, y1 = _TOP
    svg.add("rect", x=x0, y=y0, width=x1 - x0, height=y1 - y0, fill="none",
            stroke="#888888", stroke_width=1)
    n_min = len(bundle.blinks_per_minute)
    peak = max([1] + list(bundle.blinks_per_minute))
    bw = (x1 - x0) / max(1, n_min)
    sy_top = _scale(0.0, peak * 1.05, y1, y0)
    for i, count in enumerate(bundle.blinks_per_minute):
        if count > 0:
            svg.add("rect", x=_f(x0 + i * bw + 1), y=_f(sy_top(count)),
                    width=_f(max(bw - 2, 1)), height=_f(y1 - sy_top(count)),
                    fill="#555555", **{"class": "bpm-bar"})
    svg.text((x0 + x1) / 2, y0 - 6, "blinks per minute")
    svg.text(x0 - 8, y1 + 3, "0", anchor="end")
    svg.text(x0 - 8, y0 + 9, _f(float(peak)), anchor="end")

    # side panel: delay histogram
    x0, y0, x1, y1 = _SIDE
    svg.add("rect", x=x0, y=y0, width=x1 - x0, height=y1 - y0, fill="none",
            stroke="#888888", stroke_width=1)
    edges = bundle.delay_bin_edges_ms
    counts = bundle.delay_counts
    peak = max([1] + list(counts))
    sx_side = _scale(edges[0], edges[-1], x0, x1)
    sy_side = _scale(0.0, peak * 1.05, y1, y0)
    for i, count in enumerate(counts):
        if count > 0:
            left, right = sx_side(edges[i]), sx_side(edges[i + 1])
            svg.add("rect", x=_f(left), y=_f(sy_side(count)),
                    width=_f(max(right - left - 0.5, 0.5)),
                    height=_f(y1 - sy_side(count)), fill="#555555",
                    **{"class": "delay-bar"})
    mid = sx_side(0.0)
    svg.add("line", x1=_f(mid), y1=_f(y0), x2=_f(mid), y2=_f(y1),
            stroke="#bbbbbb", stroke_width=1, stroke_dasharray="3 3")
    svg.text((x0 + x1) / 2, y0 - 6, "left/right delay [ms]")
    svg.text(x0, y1 + 16, _f(edges[0]))
    svg.text(x1, y1 + 16, _f(edges[-1]))

    svg.parts.append("</svg>")
    return ("\n".join(svg.parts) + "\n").encode("utf-8")
