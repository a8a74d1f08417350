import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blinklab.errors import DegenerateDistributionError, InvalidInputError
from blinklab.peaks import PeakParams
from blinklab.pipeline import (
    BlinkEvent,
    DetectionParams,
    classify_blinks,
    detect_pair,
    extract_blinks,
    match_blinks,
    otsu_threshold,
    resolve_thresholds,
    set_blink_state,
)

from conftest import dip_series


def event(id=0, eye="left", apex=100, ear=0.05, prom=0.25, width=20.0,
          state="none", source="auto"):
    return BlinkEvent(
        id=id, eye=eye, apex_frame=apex, apex_ear=ear, prominence=prom,
        width_frames=width, height=1 - ear, onset_frame=apex - 30,
        offset_frame=apex + 30, state=state, state_source=source,
    )


class TestExtract:
    def test_constant_series_no_blinks(self, make_series):
        s = make_series([0.3] * 100)
        assert extract_blinks(s, DetectionParams()) == []

    def test_single_dip(self):
        s = dip_series(200, [(100, 0.25, 3.0)])
        params = DetectionParams(peak=PeakParams(min_prominence=0.1, min_distance=10))
        events = extract_blinks(s, params)
        assert len(events) == 1
        e = events[0]
        assert e.apex_frame == 100
        assert e.apex_ear == pytest.approx(0.05, abs=1e-9)
        assert e.height == pytest.approx(0.95, abs=1e-9)
        assert e.prominence == pytest.approx(0.25, abs=1e-3)
        assert e.onset_frame <= 100 <= e.offset_frame
        assert e.state == "none" and e.state_source == "auto"

    def test_close_dips_distance_pruned(self):
        # two dips 2 frames apart: only the deeper apex survives min_distance=10
        s = dip_series(200, [(100, 0.10, 0.8), (102, 0.20, 0.8)])
        params = DetectionParams(peak=PeakParams(min_prominence=0.05, min_distance=10))
        events = extract_blinks(s, params)
        assert [e.apex_frame for e in events] == [102]

    def test_apex_in_bridged_run_discarded(self, make_series):
        values = np.full(120, 0.3)
        values[50:60] = np.nan  # the gap interpolates flat, no fake peak
        valid = np.isfinite(values)
        # plant a real dip entirely inside the invalid run via interpolation shape:
        # make the run's neighbors low so the bridge dips
        values[49] = 0.05
        values[60] = 0.05
        s = make_series(values, valid=valid)
        params = DetectionParams(peak=PeakParams(min_prominence=0.1, min_distance=5))
        events = extract_blinks(s, params)
        # apexes at 49 and 60 are valid samples; nothing inside 50..59 may appear
        assert all(not (50 <= e.apex_frame <= 59) for e in events)

    def test_bridged_apex_dropped_when_interpolation_peaks(self, make_series):
        values = np.linspace(0.3, 0.3, 80)
        values[40] = np.nan  # dip bottom missing: bridged flat, no event apex there
        values[39] = 0.05
        values[41] = 0.05
        valid = np.isfinite(values)
        s = make_series(values, valid=valid)
        params = DetectionParams(peak=PeakParams(min_prominence=0.1, min_distance=3))
        events = extract_blinks(s, params)
        for e in events:
            assert valid[e.apex_frame]

    def test_too_few_valid_samples(self, make_series):
        s = make_series([0.3, np.nan, np.nan, np.nan], valid=[True, False, False, False])
        with pytest.raises(InvalidInputError):
            extract_blinks(s, DetectionParams())

    def test_smoothing_window_applied(self):
        s = dip_series(300, [(150, 0.25, 4.0)])
        params = DetectionParams(peak=PeakParams(min_prominence=0.1, min_distance=10),
                                 smoothing_window=5)
        events = extract_blinks(s, params)
        assert len(events) == 1
        # smoothing shallows the dip slightly: apex EAR rises above the raw 0.05
        assert events[0].apex_ear > 0.05

    def test_id_start(self):
        s = dip_series(400, [(100, 0.25, 3.0), (300, 0.25, 3.0)])
        events = extract_blinks(s, DetectionParams(), id_start=7)
        assert [e.id for e in events] == [7, 8]


class TestOtsu:
    def test_bimodal_separates_clusters(self):
        threshold = otsu_threshold([0.1, 0.12, 0.11, 0.40, 0.42, 0.45])
        assert 0.12 < threshold < 0.40

    def test_two_values_between(self):
        threshold = otsu_threshold([0.2, 0.8])
        assert 0.2 < threshold < 0.8

    def test_degenerate(self):
        with pytest.raises(DegenerateDistributionError):
            otsu_threshold([0.3, 0.3, 0.3])

    def test_validation(self):
        with pytest.raises(InvalidInputError):
            otsu_threshold([])
        with pytest.raises(InvalidInputError):
            otsu_threshold([0.2, 1.4])
        with pytest.raises(InvalidInputError):
            otsu_threshold([0.2, np.nan])
        with pytest.raises(InvalidInputError):
            otsu_threshold([0.1, 0.9], bins=1)

    def test_strictly_inside_range(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            values = rng.uniform(0, 1, size=rng.integers(2, 40))
            if len(np.unique(values)) < 2:
                continue
            t = otsu_threshold(values)
            assert values.min() < t < values.max()


def otsu_oracle(values, bins=256):
    """Exhaustive between-class-variance scan over all interior bin edges."""
    ordered = sorted(float(v) for v in values)
    n = len(ordered)
    vmin, vmax = ordered[0], ordered[-1]
    step = (vmax - vmin) / bins
    prefix = []
    acc = 0.0
    for v in ordered:
        acc += v
        prefix.append(acc)
    total = prefix[-1]
    best_edge, best_var = None, None
    for k in range(1, bins):
        edge = vmin + step * k
        w0 = 0
        while w0 < n and ordered[w0] < edge:
            w0 += 1
        if w0 == 0 or w0 == n:
            continue
        mu0 = prefix[w0 - 1] / w0
        mu1 = (total - prefix[w0 - 1]) / (n - w0)
        var = w0 * (n - w0) * (mu0 - mu1) ** 2
        if best_var is None or var > best_var:  # strict: ties keep the lowest edge
            best_var, best_edge = var, edge
    return best_edge


def test_otsu_matches_oracle_quick():
    rng = np.random.default_rng(77)
    for _ in range(100):
        kind = rng.integers(0, 3)
        size = int(rng.integers(2, 150))
        if kind == 0:
            values = rng.uniform(0, 1, size)
        elif kind == 1:
            lo = rng.uniform(0.0, 0.3, size // 2 + 1)
            hi = rng.uniform(0.5, 1.0, size // 2 + 1)
            values = np.concatenate([lo, hi])
        else:
            values = np.round(rng.uniform(0, 1, size), 2)
        if len(np.unique(values)) < 2:
            continue
        assert otsu_threshold(values) == otsu_oracle(values)


class TestClassify:
    def test_threshold_split(self):
        events = [event(id=0, prom=0.25), event(id=1, prom=0.08)]
        out = classify_blinks(events, 0.15, 0.15)
        assert [e.state for e in out] == ["complete", "partial"]
        assert all(e.state_source == "auto" for e in out)

    def test_boundary_is_complete(self):
        out = classify_blinks([event(prom=0.15)], 0.15, None)
        assert out[0].state == "complete"

    def test_none_threshold_all_complete(self):
        out = classify_blinks([event(prom=0.01)], None, None)
        assert out[0].state == "complete"

    def test_manual_state_preserved_unless_reset(self):
        events = classify_blinks([event(id=0, prom=0.3)], 0.1, None)
        events = set_blink_state(events, 0, "partial")
        again = classify_blinks(events, 0.1, None)
        assert again[0].state == "partial" and again[0].state_source == "manual"
        reset = classify_blinks(events, 0.1, None, reset_manual=True)
        assert reset[0].state == "complete" and reset[0].state_source == "auto"

    def test_per_eye_thresholds(self):
        events = [event(id=0, eye="left", prom=0.2), event(id=1, eye="right", prom=0.2)]
        out = classify_blinks(events, 0.1, 0.3)
        assert out[0].state == "complete" and out[1].state == "partial"

    def test_threshold_range_checked(self):
        with pytest.raises(InvalidInputError):
            classify_blinks([event()], 1.5, None)

    def test_auto_mode_bimodal(self):
        proms = [0.1, 0.12, 0.11, 0.40, 0.42, 0.45]
        events = [event(id=i, apex=100 * (i + 1), prom=p) for i, p in enumerate(proms)]
        resolution = resolve_thresholds(events, [], DetectionParams())
        out = classify_blinks(events, resolution.left, resolution.right)
        states = {e.prominence: e.state for e in out}
        assert all(states[p] == "partial" for p in [0.1, 0.12, 0.11])
        assert all(states[p] == "complete" for p in [0.40, 0.42, 0.45])

    def test_degenerate_falls_back_to_manual(self):
        events = [event(id=i, apex=100 * (i + 1), prom=0.2) for i in range(3)]
        params = DetectionParams(manual_threshold_left=0.3)
        resolution = resolve_thresholds(events, [], params)
        assert resolution.left == 0.3
        assert not resolution.warnings or "manual" in resolution.warnings[0]

    def test_degenerate_without_manual_warns(self):
        events = [event(id=i, apex=100 * (i + 1), prom=0.2) for i in range(3)]
        resolution = resolve_thresholds(events, [], DetectionParams())
        assert resolution.left is None
        assert any("complete" in w for w in resolution.warnings)
        out = classify_blinks(events, resolution.left, resolution.right)
        assert all(e.state == "complete" for e in out)


class TestSetState:
    def test_set_and_source(self):
        events = [event(id=0, state="complete")]
        out = set_blink_state(events, 0, "partial")
        assert out[0].state == "partial" and out[0].state_source == "manual"
        assert events[0].state == "complete"  # input untouched

    def test_set_none(self):
        out = set_blink_state([event(id=3)], 3, "none")
        assert out[0].state == "none"

    def test_unknown_id(self):
        with pytest.raises(InvalidInputError):
            set_blink_state([event(id=0)], 99, "partial")

    def test_bad_state(self):
        with pytest.raises(InvalidInputError):
            set_blink_state([event(id=0)], 0, "closed")


class TestMatch:
    def test_spec_example(self):
        lefts = [event(id=0, eye="left", apex=100), event(id=1, eye="left", apex=500)]
        rights = [event(id=2, eye="right", apex=103), event(id=3, eye="right", apex=800)]
        matches = match_blinks(lefts, rights, 240, 500)
        bilateral = [m for m in matches if m.bilateral]
        assert len(bilateral) == 1
        assert bilateral[0].left_id == 0 and bilateral[0].right_id == 2
        assert bilateral[0].delay_ms == pytest.approx(12.5)
        unilateral = {(m.left_id, m.right_id) for m in matches if not m.bilateral}
        assert unilateral == {(1, None), (None, 3)}

    def test_identical_lists_zero_delay(self):
        lefts = [event(id=i, eye="left", apex=100 * (i + 1)) for i in range(5)]
        rights = [event(id=10 + i, eye="right", apex=100 * (i + 1)) for i in range(5)]
        matches = match_blinks(lefts, rights, 240, 500)
        assert all(m.bilateral and m.delay_ms == 0 for m in matches)

    def test_empty_right(self):
        lefts = [event(id=0, eye="left", apex=100)]
        matches = match_blinks(lefts, [], 240, 500)
        assert len(matches) == 1 and matches[0].right_id is None

    def test_one_to_one(self):
        rng = np.random.default_rng(3)
        lefts = [event(id=i, eye="left", apex=int(a))
                 for i, a in enumerate(sorted(rng.integers(100, 50000, 12)))]
        rights = [event(id=100 + i, eye="right", apex=int(a))
                  for i, a in enumerate(sorted(rng.integers(100, 50000, 12)))]
        matches = match_blinks(lefts, rights, 240, 500)
        seen = [m.left_id for m in matches if m.left_id is not None]
        assert len(seen) == len(set(seen))
        seen = [m.right_id for m in matches if m.right_id is not None]
        assert len(seen) == len(set(seen))
        for m in matches:
            if m.bilateral:
                assert abs(m.delay_ms) <= 500

    def test_fps_validated(self):
        with pytest.raises(InvalidInputError):
            match_blinks([], [], 0, 500)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(min_value=-1000, max_value=1000))
    def test_shift_invariance(self, shift):
        apexes_l = [1000, 3000, 7000]
        apexes_r = [1030, 3100, 9000]
        base = match_blinks(
            [event(id=i, eye="left", apex=a) for i, a in enumerate(apexes_l)],
            [event(id=10 + i, eye="right", apex=a) for i, a in enumerate(apexes_r)],
            240, 500,
        )
        shifted = match_blinks(
            [event(id=i, eye="left", apex=a + shift) for i, a in enumerate(apexes_l)],
            [event(id=10 + i, eye="right", apex=a + shift) for i, a in enumerate(apexes_r)],
            240, 500,
        )
        assert [(m.left_id, m.right_id) for m in base] == [
            (m.left_id, m.right_id) for m in shifted
        ]
        for a, b in zip(base, shifted):
            if a.bilateral:
                assert a.delay_ms == pytest.approx(b.delay_ms)


def brute_force_best_matching(lefts_ms, rights_ms, max_delay):
    """Exhaustive max-cardinality, then min-total-|delay| assignment."""
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def go(i, used):
        if i == len(lefts_ms):
            return 0, 0.0
        best = go(i + 1, used)
        for j, r in enumerate(rights_ms):
            if used >> j & 1:
                continue
            d = abs(r - lefts_ms[i])
            if d <= max_delay:
                count, total = go(i + 1, used | (1 << j))
                cand = (count + 1, total + d)
                if cand[0] > best[0] or (cand[0] == best[0] and cand[1] < best[1]):
                    best = cand
        return best

    return go(0, 0)


def random_apex_config(rng, fps=240.0, max_delay_ms=500.0):
    """Blink-like apex layout: same-eye spacing >= twice the match window."""
    min_gap = int(2 * max_delay_ms / 1000.0 * fps)
    lefts = []
    t = int(rng.integers(min_gap, 3 * min_gap))  # keep every apex positive
    for _ in range(int(rng.integers(0, 13))):
        lefts.append(t)
        t += min_gap + int(rng.integers(0, 4 * min_gap))
    rights = []
    for t in lefts:
        u = rng.random()
        if u < 0.08:
            continue  # left goes unilateral
        if u < 0.16:
            # boundary tie: a right apex exactly between two hypothetical lefts
            rights.append(t + int(max_delay_ms / 1000.0 * fps))
        else:
            rights.append(t + int(rng.integers(-110, 111)))
    for _ in range(int(rng.integers(0, 3))):  # stray unilateral rights
        rights.append(int(rng.integers(0, max(1, t + min_gap))))
    rights = sorted(set(rights))[:12]
    return sorted(lefts), rights


def test_matching_against_brute_force_quick():
    rng = np.random.default_rng(2024)
    fps, max_delay = 240.0, 500.0
    for _ in range(50):
        lefts, rights = random_apex_config(rng, fps, max_delay)
        left_events = [event(id=i, eye="left", apex=a) for i, a in enumerate(lefts)]
        right_events = [event(id=100 + i, eye="right", apex=a) for i, a in enumerate(rights)]
        matches = match_blinks(left_events, right_events, fps, max_delay)
        bilateral = [m for m in matches if m.bilateral]
        greedy_total = sum(abs(m.delay_ms) for m in bilateral)
        best_count, best_total = brute_force_best_matching(
            tuple(a / fps * 1000.0 for a in lefts),
            tuple(a / fps * 1000.0 for a in rights),
            max_delay,
        )
        assert len(bilateral) == best_count
        assert greedy_total == pytest.approx(best_total, abs=1e-9)


class TestDetectPair:
    def test_ids_unique_and_matched(self):
        left = dip_series(2000, [(500, 0.25, 4.0), (1500, 0.10, 4.0)], eye="left")
        right = dip_series(2000, [(505, 0.24, 4.0), (1490, 0.11, 4.0)], eye="right")
        result = detect_pair(left, right, DetectionParams())
        ids = [e.id for e in result.events]
        assert len(ids) == len(set(ids))
        assert all(e.eye == "left" for e in result.left_events)
        assert all(e.eye == "right" for e in result.right_events)
        assert any(m.bilateral for m in result.matches)
        assert all(e.state in ("partial", "complete") for e in result.events)

    def test_params_validation(self):
        with pytest.raises(InvalidInputError):
            DetectionParams(threshold_mode="magic")
        with pytest.raises(InvalidInputError):
            DetectionParams(threshold_mode="manual")
        with pytest.raises(InvalidInputError):
            DetectionParams(manual_threshold_left=1.2)
        with pytest.raises(InvalidInputError):
            DetectionParams(max_match_delay_ms=0)
        with pytest.raises(InvalidInputError):
            DetectionParams(smoothing_window=4)
