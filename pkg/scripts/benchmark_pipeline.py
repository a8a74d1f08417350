#!/usr/bin/env python3
"""Time the full pipeline on a synthetic 20-minute, 240 FPS dual recording.

Stages are timed separately: CSV load, detection+classification+matching,
statistics, and the summary bundle.  The whole chain should stay well under
five seconds on commodity hardware.
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from blinklab.pipeline import DetectionParams, detect_pair
from blinklab.series import ColumnSelection, load_score_csv
from blinklab.stats import compute_statistics
from blinklab.summary import build_summary
from blinklab.synth import recording_to_csv, synth_recording


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--duration-s", type=float, default=1200.0)
    parser.add_argument("--fps", type=float, default=240.0)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    print(f"generating {args.duration_s:.0f} s at {args.fps:.0f} FPS ...")
    recording = synth_recording(args.duration_s, args.fps, seed=args.seed)
    csv_bytes = recording_to_csv(recording)
    print(f"  {len(recording.left)} frames/eye, {len(recording.schedule)} planted blinks, "
          f"{len(csv_bytes) / 1e6:.1f} MB CSV")

    stages = {}
    t0 = time.perf_counter()
    left, right = load_score_csv(
        csv_bytes, ColumnSelection("EAR_2D_left", "EAR_2D_right"), args.fps
    )
    stages["load"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    result = detect_pair(left, right, DetectionParams())
    stages["detect"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    compute_statistics(
        result.left_events, result.right_events, left, right,
        (result.threshold_left, result.threshold_right), args.fps,
    )
    stages["stats"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    build_summary(left, right, result.events, result.matches, args.fps)
    stages["summary"] = time.perf_counter() - t0

    total = sum(stages.values())
    n_events = len(result.events)
    print(f"detected {n_events} events, {sum(1 for m in result.matches if m.bilateral)} pairs")
    for name, dt in stages.items():
        print(f"  {name:<8} {dt * 1000:8.1f} ms")
    print(f"  {'total':<8} {total * 1000:8.1f} ms")


if __name__ == "__main__":
    main()
