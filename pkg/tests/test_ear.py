import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blinklab.ear import (
    EyeLandmarks,
    compute_ear_2d,
    compute_ear_3d,
    ear_series_from_landmarks,
)
from blinklab.errors import DegenerateGeometryError, InvalidInputError

SYMMETRIC = ((0, 0), (0.5, 0.3), (1.5, 0.3), (2, 0), (1.5, -0.3), (0.5, -0.3))


def oracle_ear(points, dims):
    # independent distance-formula oracle: sqrt of explicit squared sums
    def dist(a, b):
        return math.sqrt(sum((a[i] - b[i]) ** 2 for i in range(dims)))

    p1, p2, p3, p4, p5, p6 = points
    return (dist(p2, p6) + dist(p3, p5)) / (2 * dist(p1, p4))


def test_symmetric_fixture_exact():
    assert compute_ear_2d(EyeLandmarks(points=SYMMETRIC)) == 0.3


def test_closed_lids_zero():
    closed = ((0, 0), (0.5, 0.1), (1.5, 0.1), (2, 0), (1.5, 0.1), (0.5, 0.1))
    assert compute_ear_2d(EyeLandmarks(points=closed)) == 0.0


def test_random_sets_match_oracle():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        pts = rng.uniform(-10, 10, size=(6, 2))
        pts[3] = pts[0] + rng.uniform(0.5, 5.0, size=2)  # keep corners apart
        lm = EyeLandmarks(points=tuple(map(tuple, pts)))
        assert compute_ear_2d(lm) == pytest.approx(oracle_ear(lm.points, 2), abs=1e-12)


def test_3d_matches_2d_when_planar():
    flat = tuple((x, y, 0.0) for x, y in SYMMETRIC)
    lm = EyeLandmarks(points=flat)
    assert compute_ear_3d(lm) == 0.3
    assert compute_ear_3d(lm) == compute_ear_2d(lm)


def test_3d_rotation_invariance():
    angle = math.radians(30)
    c, s = math.cos(angle), math.sin(angle)
    rotated = tuple((x * c, y, -x * s) for x, y in SYMMETRIC)  # about the vertical axis
    assert compute_ear_3d(EyeLandmarks(points=rotated)) == pytest.approx(0.3, abs=1e-12)


def test_degenerate_corners_raise():
    bad = ((1, 1), (0.5, 0.3), (1.5, 0.3), (1, 1), (1.5, -0.3), (0.5, -0.3))
    with pytest.raises(DegenerateGeometryError):
        compute_ear_2d(EyeLandmarks(points=bad))


def test_nonfinite_rejected():
    pts = list(SYMMETRIC)
    pts[2] = (float("nan"), 0.3)
    with pytest.raises(InvalidInputError):
        EyeLandmarks(points=tuple(pts))


def test_wrong_count_rejected():
    with pytest.raises(InvalidInputError):
        EyeLandmarks(points=SYMMETRIC[:5])


def test_3d_requires_depth():
    with pytest.raises(InvalidInputError):
        compute_ear_3d(EyeLandmarks(points=SYMMETRIC))


finite = st.floats(min_value=-100, max_value=100, allow_nan=False)


@st.composite
def landmark_sets(draw):
    pts = [(draw(finite), draw(finite)) for _ in range(6)]
    dx, dy = draw(finite), draw(finite)
    pts[3] = (pts[0][0] + dx, pts[0][1] + dy)
    if math.hypot(dx, dy) < 1e-3:
        pts[3] = (pts[0][0] + 1.0, pts[0][1])
    return EyeLandmarks(points=tuple(pts))


@settings(max_examples=200, deadline=None)
@given(
    landmark_sets(),
    st.floats(min_value=-math.pi, max_value=math.pi),
    st.floats(min_value=0.01, max_value=50),
    st.floats(min_value=-1000, max_value=1000),
    st.floats(min_value=-1000, max_value=1000),
)
def test_similarity_invariance_2d(lm, angle, scale, tx, ty):
    c, s = math.cos(angle), math.sin(angle)
    moved = tuple(
        (scale * (x * c - y * s) + tx, scale * (x * s + y * c) + ty)
        for x, y in lm.points
    )
    base = compute_ear_2d(lm)
    assert compute_ear_2d(EyeLandmarks(points=moved)) == pytest.approx(base, rel=1e-9, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(landmark_sets())
def test_lid_swap_symmetry(lm):
    p1, p2, p3, p4, p5, p6 = lm.points
    swapped = EyeLandmarks(points=(p1, p3, p2, p4, p6, p5))
    assert compute_ear_2d(swapped) == pytest.approx(compute_ear_2d(lm), rel=1e-12)


def test_series_from_landmarks_constant():
    lm = EyeLandmarks(points=SYMMETRIC)
    left, right = ear_series_from_landmarks([(lm, lm)] * 10, fps=240)
    assert len(left) == len(right) == 10
    assert left.valid.all() and right.valid.all()
    assert np.all(left.values == 0.3)


def test_series_degenerate_frame_marked_invalid():
    lm = EyeLandmarks(points=SYMMETRIC)
    frames = [(lm, lm)] * 10
    frames[5] = (None, lm)
    left, right = ear_series_from_landmarks(frames, fps=240)
    assert not left.valid[5]
    assert left.valid.sum() == 9
    assert right.valid.all()


def test_series_matches_per_frame_oracle():
    rng = np.random.default_rng(11)
    frames = []
    for _ in range(50):
        pts = rng.uniform(-5, 5, size=(6, 2))
        pts[3] = pts[0] + rng.uniform(0.5, 3.0, size=2)
        lm = EyeLandmarks(points=tuple(map(tuple, pts)))
        frames.append((lm, lm))
    left, _ = ear_series_from_landmarks(frames, fps=30)
    expected = [compute_ear_2d(lm) for lm, _ in frames]
    mask = left.valid
    assert np.allclose(left.values[mask], np.asarray(expected)[mask], atol=0)
    # out-of-range ratios are kept but flagged invalid
    for i, e in enumerate(expected):
        assert left.valid[i] == (0.0 <= e <= 1.0)


def test_series_rejects_empty_and_bad_fps():
    lm = EyeLandmarks(points=SYMMETRIC)
    with pytest.raises(InvalidInputError):
        ear_series_from_landmarks([], fps=240)
    with pytest.raises(InvalidInputError):
        ear_series_from_landmarks([(lm, lm)], fps=0)
