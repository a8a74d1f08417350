"""1-D peak detection: plateau-aware maxima, topographic prominence,
interpolated widths, and minimum-distance pruning.

Implements the widely used find-peaks semantics directly so the filter
chain stays explicit and pinned: local maxima -> distance pruning ->
prominence filter -> width filter.  Prominence scans are full-span (no
window); plateau apexes report the floor midpoint; base ties resolve to
the sample closest to the apex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import InvalidInputError


@dataclass(frozen=True)
class PeakParams:
    """Filter thresholds for find_peaks, in signal units and frames."""

    min_prominence: float = 0.0
    min_distance: float = 1.0
    min_width: float = 0.0
    max_width: Optional[float] = None
    rel_height: float = 0.5

    def __post_init__(self):
        if not self.min_distance >= 1:
            raise InvalidInputError(f"min_distance must be >= 1, got {self.min_distance}")
        if not self.min_prominence >= 0:
            raise InvalidInputError(f"min_prominence must be >= 0, got {self.min_prominence}")
        if not self.min_width >= 0:
            raise InvalidInputError(f"min_width must be >= 0, got {self.min_width}")
        if self.max_width is not None and self.max_width < self.min_width:
            raise InvalidInputError("max_width must be >= min_width")
        if not 0 < self.rel_height <= 1:
            raise InvalidInputError(f"rel_height must be in (0, 1], got {self.rel_height}")


@dataclass(frozen=True)
class PeakCandidate:
    """One detected peak and its measurements."""

    index: int
    height: float
    prominence: float
    left_base: int
    right_base: int
    width: float
    width_height: float
    left_ip: float
    right_ip: float


def _as_signal(signal: Sequence[float]) -> np.ndarray:
    x = np.asarray(signal, dtype=np.float64)
    if x.ndim != 1:
        raise InvalidInputError("signal must be 1-D")
    if not np.isfinite(x).all():
        raise InvalidInputError("signal contains non-finite samples")
    return x


def local_maxima(signal: Sequence[float]) -> np.ndarray:
    """Apex indices of all interior local maxima, plateaus included.

    A sample (or plateau of equal samples) is a maximum when it is strictly
    greater than the nearest differing neighbor on both sides; plateaus
    report the floor midpoint.  Endpoints never qualify.
    """
    x = _as_signal(signal)
    n = len(x)
    if n < 3:
        raise InvalidInputError(f"signal must have at least 3 samples, got {n}")
    # run-length encode equal samples, then test each interior run
    change = np.flatnonzero(x[1:] != x[:-1]) + 1
    starts = np.concatenate(([0], change))
    ends = np.concatenate((change - 1, [n - 1]))
    vals = x[starts]
    if len(vals) < 3:
        return np.empty(0, dtype=np.intp)
    rising = np.empty(len(vals), dtype=bool)
    rising[0] = False
    rising[1:] = vals[1:] > vals[:-1]
    falling = np.empty(len(vals), dtype=bool)
    falling[-1] = False
    falling[:-1] = vals[:-1] > vals[1:]
    is_max = rising & falling & (starts > 0) & (ends < n - 1)
    s, e = starts[is_max], ends[is_max]
    return (s + (e - s) // 2).astype(np.intp)


def _scan_first_greater(x: np.ndarray, apex: int, height: float, step: int) -> int:
    """Nearest index in direction `step` whose sample strictly exceeds `height`.

    Returns -1 (left) or len(x) (right) when no such sample exists.  Scans
    in doubling blocks so short scans stay cheap on long signals.
    """
    n = len(x)
    block = 32
    pos = apex + step
    while 0 <= pos < n:
        if step < 0:
            start = max(0, pos - block + 1)
            seg = x[start : pos + 1]
            hits = np.flatnonzero(seg > height)
            if len(hits):
                return start + hits[-1]
            pos = start - 1
        else:
            stop = min(n, pos + block)
            seg = x[pos:stop]
            hits = np.flatnonzero(seg > height)
            if len(hits):
                return pos + hits[0]
            pos = stop
        block *= 2
    return -1 if step < 0 else n


def prominences(
    signal: Sequence[float], apexes: Sequence[int]
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Topographic prominence and base indices for each apex.

    Each side is scanned outward until a sample strictly exceeds the apex
    height (or the signal ends); the base is the lowest sample in that span,
    ties resolving to the sample closest to the apex.  Prominence is apex
    height minus the higher of the two base levels.
    """
    x = _as_signal(signal)
    n = len(x)
    apexes = np.asarray(apexes, dtype=np.intp)
    proms = np.empty(len(apexes))
    left_bases = np.empty(len(apexes), dtype=np.intp)
    right_bases = np.empty(len(apexes), dtype=np.intp)
    for k, a in enumerate(apexes):
        if not (0 < a < n - 1) or x[a - 1] > x[a] or x[a + 1] > x[a]:
            raise InvalidInputError(f"index {a} is not a local maximum")
        h = x[a]

        stop = _scan_first_greater(x, a, h, -1)
        seg = x[stop + 1 : a]
        if len(seg):
            rev = seg[::-1]
            off = int(np.argmin(rev))  # first minimum in reversed view = closest to apex
            left_bases[k] = a - 1 - off
            left_min = rev[off]
        else:  # apex adjacent to signal start
            left_bases[k] = a
            left_min = h

        stop = _scan_first_greater(x, a, h, +1)
        seg = x[a + 1 : stop]
        if len(seg):
            off = int(np.argmin(seg))
            right_bases[k] = a + 1 + off
            right_min = seg[off]
        else:
            right_bases[k] = a
            right_min = h

        proms[k] = h - max(left_min, right_min)
    return proms, left_bases, right_bases


def widths(
    signal: Sequence[float],
    apexes: Sequence[int],
    proms: Sequence[float],
    left_bases: Sequence[int],
    right_bases: Sequence[int],
    rel_height: float = 0.5,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Peak widths at `rel_height` of the prominence below each apex.

    The evaluation height is apex - rel_height * prominence; intersection
    positions are linearly interpolated between the straddling samples,
    bounded by the prominence bases.
    """
    if not 0 < rel_height <= 1:
        raise InvalidInputError(f"rel_height must be in (0, 1], got {rel_height}")
    x = _as_signal(signal)
    apexes = np.asarray(apexes, dtype=np.intp)
    proms = np.asarray(proms, dtype=np.float64)
    left_bases = np.asarray(left_bases, dtype=np.intp)
    right_bases = np.asarray(right_bases, dtype=np.intp)
    if not (len(apexes) == len(proms) == len(left_bases) == len(right_bases)):
        raise InvalidInputError("prominence data arrays must match apexes in length")

    out_w = np.empty(len(apexes))
    out_h = np.empty(len(apexes))
    out_li = np.empty(len(apexes))
    out_ri = np.empty(len(apexes))
    for k, a in enumerate(apexes):
        h_eval = x[a] - rel_height * proms[k]

        seg = x[left_bases[k] : a + 1]  # walk left from apex within the base span
        rev = seg[::-1]
        below = np.flatnonzero(rev <= h_eval)
        i = a - below[0] if len(below) else left_bases[k]
        left_ip = float(i)
        if x[i] < h_eval:
            left_ip += (h_eval - x[i]) / (x[i + 1] - x[i])

        seg = x[a : right_bases[k] + 1]
        below = np.flatnonzero(seg <= h_eval)
        i = a + below[0] if len(below) else right_bases[k]
        right_ip = float(i)
        if x[i] < h_eval:
            right_ip -= (h_eval - x[i]) / (x[i - 1] - x[i])

        out_w[k] = right_ip - left_ip
        out_h[k] = h_eval
        out_li[k] = left_ip
        out_ri[k] = right_ip
    return out_w, out_h, out_li, out_ri


def select_by_distance(
    apexes: Sequence[int], heights: Sequence[float], min_distance: float
) -> np.ndarray:
    """Apex indices surviving minimum-distance pruning, ascending.

    Apexes are processed in order of descending height (ties to the lower
    index); an apex is kept iff no already-kept apex lies strictly within
    `min_distance` frames.
    """
    apexes = np.asarray(apexes, dtype=np.intp)
    heights = np.asarray(heights, dtype=np.float64)
    if len(apexes) != len(heights):
        raise InvalidInputError("apexes and heights must match in length")
    if len(apexes) > 1 and not (np.diff(apexes) > 0).all():
        raise InvalidInputError("apexes must be strictly increasing")
    k = len(apexes)
    keep = np.ones(k, dtype=bool)
    order = np.lexsort((apexes, -heights))  # height desc, then index asc
    for pos in order:
        if not keep[pos]:
            continue
        j = pos - 1
        while j >= 0 and apexes[pos] - apexes[j] < min_distance:
            keep[j] = False
            j -= 1
        j = pos + 1
        while j < k and apexes[j] - apexes[pos] < min_distance:
            keep[j] = False
            j += 1
    return apexes[keep]


def find_peaks(signal: Sequence[float], params: PeakParams) -> List[PeakCandidate]:
    """Full detection pipeline; surviving candidates carry all measurements.

    Stage order is fixed: local maxima, distance pruning, prominence
    computation and filter, width computation and filter.
    """
    x = _as_signal(signal)
    apexes = local_maxima(x)
    apexes = select_by_distance(apexes, x[apexes], params.min_distance)
    proms, lbases, rbases = prominences(x, apexes)

    sel = proms >= params.min_prominence
    apexes, proms = apexes[sel], proms[sel]
    lbases, rbases = lbases[sel], rbases[sel]

    ws, whs, lips, rips = widths(x, apexes, proms, lbases, rbases, params.rel_height)
    max_width = np.inf if params.max_width is None else params.max_width
    sel = (ws >= params.min_width) & (ws <= max_width)

    return [
        PeakCandidate(
            index=int(apexes[i]),
            height=float(x[apexes[i]]),
            prominence=float(proms[i]),
            left_base=int(lbases[i]),
            right_base=int(rbases[i]),
            width=float(ws[i]),
            width_height=float(whs[i]),
            left_ip=float(lips[i]),
            right_ip=float(rips[i]),
        )
        for i in np.flatnonzero(sel)
    ]
