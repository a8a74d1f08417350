import csv
import io
import json

import numpy as np
import pytest

from blinklab import io as bio
from blinklab.errors import InvalidInputError, MissingColumnError
from blinklab.pipeline import BlinkEvent, BlinkMatch, DetectionParams, detect_pair
from blinklab.series import ColumnSelection, load_score_csv
from blinklab.stats import compute_statistics, report_rows

from conftest import dip_series


def event(id, eye, apex, state="complete"):
    return BlinkEvent(
        id=id, eye=eye, apex_frame=apex, apex_ear=0.051234567, prominence=0.25,
        width_frames=20.5, height=0.948765433, onset_frame=apex - 30,
        offset_frame=apex + 30, state=state, state_source="auto",
    )


class TestScores:
    def test_export_load_round_trip(self, make_series):
        rng = np.random.default_rng(8)
        values = rng.uniform(0, 0.6, 500)
        left = make_series(values, fps=240, eye="left")
        right = make_series(values[::-1].copy(), fps=240, eye="right")
        data = bio.export_scores([("EAR_2D_left", left), ("EAR_2D_right", right)])
        left2, right2 = load_score_csv(data, ColumnSelection("EAR_2D_left", "EAR_2D_right"), 240)
        assert np.allclose(left2.values, left.values, atol=1e-9)
        assert np.allclose(right2.values, right.values, atol=1e-9)
        assert left2.valid.all()

    def test_invalid_cells_round_trip_as_invalid(self, make_series):
        left = make_series([0.3, np.nan, 0.2], valid=[True, False, True])
        right = make_series([0.1, 0.2, 0.3])
        data = bio.export_scores([("EAR_2D_left", left), ("EAR_2D_right", right)])
        assert b"\n1,,0.2\n" in data
        left2, _ = load_score_csv(data, ColumnSelection("EAR_2D_left", "EAR_2D_right"), 240)
        assert list(left2.valid) == [True, False, True]

    def test_length_mismatch_rejected(self, make_series):
        with pytest.raises(InvalidInputError):
            bio.export_scores([
                ("a", make_series([0.1, 0.2])), ("b", make_series([0.1])),
            ])


LANDMARK_HEADER_2D = "frame," + ",".join(
    f"{eye}{p}{axis}" for eye in ("L", "R") for p in range(1, 7) for axis in ("x", "y")
)
SYM = [(0, 0), (0.5, 0.3), (1.5, 0.3), (2, 0), (1.5, -0.3), (0.5, -0.3)]


def landmark_row(frame, pts):
    cells = [str(frame)]
    for _ in range(2):  # both eyes share the fixture
        for x, y in pts:
            cells += [str(x), str(y)]
    return ",".join(cells)


class TestLandmarks:
    def test_load_and_compute(self):
        rows = [LANDMARK_HEADER_2D] + [landmark_row(i, SYM) for i in range(5)]
        frames, has_z = bio.load_landmarks_csv("\n".join(rows).encode())
        assert len(frames) == 5 and not has_z
        left, right = frames[0]
        assert left is not None and right is not None

    def test_missing_column_named(self):
        header = LANDMARK_HEADER_2D.replace(",R6y", "")
        with pytest.raises(MissingColumnError) as err:
            bio.load_landmarks_csv((header + "\n" + landmark_row(0, SYM)).encode())
        assert "R6y" in str(err.value)

    def test_blank_cell_gives_missing_eye(self):
        row = landmark_row(0, SYM).rsplit(",", 1)[0] + ","  # blank final R cell
        frames, _ = bio.load_landmarks_csv((LANDMARK_HEADER_2D + "\n" + row).encode())
        left, right = frames[0]
        assert left is not None and right is None

    def test_z_columns_detected(self):
        header = "frame," + ",".join(
            f"{eye}{p}{axis}" for eye in ("L", "R") for p in range(1, 7)
            for axis in ("x", "y", "z")
        )
        cells = ["0"]
        for _ in range(2):
            for x, y in SYM:
                cells += [str(x), str(y), "0.0"]
        frames, has_z = bio.load_landmarks_csv((header + "\n" + ",".join(cells)).encode())
        assert has_z and frames[0][0].has_depth

    def test_header_sniffing(self):
        assert bio.looks_like_landmark_header(LANDMARK_HEADER_2D.split(","))
        assert not bio.looks_like_landmark_header(["frame", "EAR_2D_left", "EAR_2D_right"])


class TestBlinkTable:
    def build(self):
        lefts = [event(0, "left", 1000), event(1, "left", 5000)]
        rights = [event(2, "right", 1003, state="partial")]
        matches = [
            BlinkMatch(0, 2, 3 / 240 * 1000),
            BlinkMatch(1, None, None),
        ]
        return lefts, rights, matches

    def test_header_only_when_empty(self):
        data = bio.export_blinks([], [], [], 240)
        assert data.decode().strip() == bio.BLINK_HEADER

    def test_matched_pair_rows(self):
        lefts, rights, matches = self.build()
        lines = bio.export_blinks(lefts, rights, matches, 240).decode().strip().split("\n")
        rows = [ln.split(",") for ln in lines[1:]]
        by_id = {int(r[0]): r for r in rows}
        left_row, right_row = by_id[0], by_id[2]
        assert left_row[12] == right_row[12] == "0"  # shared match id
        assert float(left_row[13]) == pytest.approx(12.5)
        assert float(right_row[13]) == pytest.approx(-12.5)
        assert by_id[1][13] == ""  # unilateral: blank delay
        assert by_id[1][12] == "1"

    def test_round_trip(self):
        lefts, rights, matches = self.build()
        data = bio.export_blinks(lefts, rights, matches, 240)
        lefts2, rights2, matches2 = bio.load_blinks_csv(data)
        assert len(lefts2) == len(lefts) and len(rights2) == len(rights)
        for a, b in zip(sorted(lefts, key=lambda e: e.id), sorted(lefts2, key=lambda e: e.id)):
            assert a.id == b.id and a.apex_frame == b.apex_frame
            assert a.state == b.state and a.state_source == b.state_source
            assert a.apex_ear == pytest.approx(b.apex_ear, rel=1e-9)
            assert a.prominence == pytest.approx(b.prominence, rel=1e-9)
            assert a.width_frames == pytest.approx(b.width_frames, rel=1e-9)
            assert a.onset_frame == b.onset_frame and a.offset_frame == b.offset_frame
        assert len(matches2) == 2
        bilateral = [m for m in matches2 if m.bilateral][0]
        assert (bilateral.left_id, bilateral.right_id) == (0, 2)
        assert bilateral.delay_ms == pytest.approx(12.5)

    def test_rows_sorted_by_apex(self):
        lefts, rights, matches = self.build()
        lines = bio.export_blinks(lefts, rights, matches, 240).decode().strip().split("\n")
        apexes = [int(ln.split(",")[2]) for ln in lines[1:]]
        assert apexes == sorted(apexes)

    def test_bad_header_rejected(self):
        with pytest.raises(InvalidInputError):
            bio.load_blinks_csv(b"nope,nope\n1,2\n")


class TestStatsExport:
    def make_report(self, n=14400, events=True):
        left = dip_series(n, [], eye="left")
        right = dip_series(n, [], eye="right")
        evs = [event(0, "left", 2000)] if events else []
        return compute_statistics(evs, [], left, right, (0.1, 0.2), 240.0)

    def test_csv_rows(self):
        report = self.make_report()
        rows = list(csv.reader(io.StringIO(bio.export_stats_csv(report).decode())))
        assert rows[0] == ["statistic", "value", "unit"]
        names = [r[0] for r in rows[1:]]
        assert len(names) == len(set(names))
        assert names == [n for n, _v, _u in report_rows(report)]

    def test_json_matches_csv(self):
        report = self.make_report()
        rows = list(csv.reader(io.StringIO(bio.export_stats_csv(report).decode())))[1:]
        payload = json.loads(bio.export_stats_json(report).decode())
        assert len(payload) == len(rows)
        for name, value, _unit in rows:
            assert payload[name] == pytest.approx(float(value), rel=1e-9)

    def test_empty_events_omits_absent(self):
        report = self.make_report(events=False)
        body = bio.export_stats_csv(report).decode()
        assert "Prominence_min" not in body
        assert "Partial_Blink_Total_left,0,N" in body

    def test_row_count_scales_with_minutes(self):
        report3 = self.make_report(n=3 * 60 * 240)
        report1 = self.make_report(n=14400)
        rows3 = len(report_rows(report3))
        rows1 = len(report_rows(report1))
        assert rows3 - rows1 == 4 * 2  # two extra minutes, four vectors


class TestAtomicWrite:
    def test_writes_and_replaces(self, tmp_path):
        target = tmp_path / "out.txt"
        bio.atomic_write(target, b"one")
        bio.atomic_write(target, b"two")
        assert target.read_bytes() == b"two"
        leftovers = [p for p in tmp_path.iterdir() if p.name != "out.txt"]
        assert leftovers == []


class TestRunConfig:
    def test_validation(self, tmp_path):
        with pytest.raises(InvalidInputError):
            bio.RunConfig(input_path=tmp_path, input_kind="video", fps=240, out_dir=tmp_path)
        with pytest.raises(InvalidInputError):
            bio.RunConfig(input_path=tmp_path, input_kind="scores", fps=0, out_dir=tmp_path)
        cfg = bio.RunConfig(input_path=tmp_path, input_kind="scores", fps=240, out_dir=tmp_path)
        assert cfg.params == DetectionParams()


def test_detection_export_round_trip_end_to_end():
    left = dip_series(20000, [(5000, 0.25, 4.0), (12000, 0.1, 5.0)], eye="left")
    right = dip_series(20000, [(5004, 0.24, 4.0), (12010, 0.09, 5.0)], eye="right")
    result = detect_pair(left, right, DetectionParams())
    data = bio.export_blinks(result.left_events, result.right_events, result.matches, 240)
    lefts2, rights2, matches2 = bio.load_blinks_csv(data)
    assert len(lefts2) == len(result.left_events)
    assert len(rights2) == len(result.right_events)
    assert len(matches2) == len(result.matches)
    for a, b in zip(result.left_events, sorted(lefts2, key=lambda e: e.id)):
        assert a.apex_frame == b.apex_frame
        assert a.prominence == pytest.approx(b.prominence, rel=1e-9)
