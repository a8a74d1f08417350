"""Eye-Aspect-Ratio from six-point eye contours, in 2D and 3D variants.

The contour order is p1 outer corner, p2/p3 upper lid, p4 inner corner,
p5/p6 lower lid.  The ratio

    (|p2 - p6| + |p3 - p5|) / (2 * |p1 - p4|)

is ~0 for a closed eye and typically 0.2-0.4 when open.  Left/right always
means the subject's own left and right.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DegenerateGeometryError, InvalidInputError
from .series import EarSeries

Point = Tuple[float, ...]


@dataclass(frozen=True)
class EyeLandmarks:
    """Six eye-contour points, each (x, y) or (x, y, z).

    Point order is positional (p1..p6); all coordinates must be finite and
    share the same dimensionality.
    """

    points: Tuple[Point, ...]

    def __post_init__(self):
        pts = tuple(tuple(float(c) for c in p) for p in self.points)
        if len(pts) != 6:
            raise InvalidInputError(f"expected 6 landmarks, got {len(pts)}")
        dims = {len(p) for p in pts}
        if dims not in ({2}, {3}):
            raise InvalidInputError("landmarks must be uniformly 2-D or 3-D")
        for p in pts:
            if not all(math.isfinite(c) for c in p):
                raise InvalidInputError(f"non-finite landmark coordinate in {p}")
        object.__setattr__(self, "points", pts)

    @property
    def has_depth(self) -> bool:
        return len(self.points[0]) == 3


def _dist(a: Point, b: Point, dims: int) -> float:
    return math.hypot(*(a[i] - b[i] for i in range(dims)))


def _ear(landmarks: EyeLandmarks, dims: int) -> float:
    p1, p2, p3, p4, p5, p6 = landmarks.points
    horizontal = _dist(p1, p4, dims)
    if horizontal == 0.0:
        raise DegenerateGeometryError("eye corners coincide (zero horizontal distance)")
    return (_dist(p2, p6, dims) + _dist(p3, p5, dims)) / (2.0 * horizontal)


def compute_ear_2d(landmarks: EyeLandmarks) -> float:
    """EAR from the x/y coordinates only (z, if present, is ignored)."""
    return _ear(landmarks, 2)


def compute_ear_3d(landmarks: EyeLandmarks) -> float:
    """EAR from full 3D Euclidean distances; all points must carry z."""
    if not landmarks.has_depth:
        raise InvalidInputError("3D EAR requires z on every landmark")
    return _ear(landmarks, 3)


FramePair = Tuple[Optional[EyeLandmarks], Optional[EyeLandmarks]]


def ear_series_from_landmarks(
    frames: Sequence[FramePair], fps: float, mode: str = "2d"
) -> Tuple[EarSeries, EarSeries]:
    """Map per-frame (left, right) landmarks to a pair of EarSeries.

    Frames with missing or degenerate landmarks yield invalid samples rather
    than being dropped, so frame indexing is preserved.  Values outside
    [0, 1] are kept but flagged invalid: the ratio is only meaningful inside
    that range, and an excursion is evidence the eye was not tracked.
    """
    if len(frames) == 0:
        raise InvalidInputError("frames must be non-empty")
    if not fps > 0:
        raise InvalidInputError(f"fps must be > 0, got {fps}")
    if mode not in ("2d", "3d"):
        raise InvalidInputError(f"mode must be '2d' or '3d', got {mode!r}")
    compute = compute_ear_2d if mode == "2d" else compute_ear_3d

    n = len(frames)
    out = {
        "left": (np.full(n, np.nan), np.zeros(n, dtype=bool)),
        "right": (np.full(n, np.nan), np.zeros(n, dtype=bool)),
    }
    for i, (left, right) in enumerate(frames):
        for eye, lm in (("left", left), ("right", right)):
            if lm is None:
                continue
            values, valid = out[eye]
            try:
                value = compute(lm)
            except (DegenerateGeometryError, InvalidInputError):
                continue
            values[i] = value
            valid[i] = 0.0 <= value <= 1.0

    def build(eye: str) -> EarSeries:
        values, valid = out[eye]
        return EarSeries(values=values, valid=valid, fps=fps, eye=eye)

    return build("left"), build("right")
