#!/usr/bin/env python3
"""Regenerate data/sample_scores.csv, the seeded 60 s / 240 FPS demo recording."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from blinklab.io import atomic_write
from blinklab.synth import recording_to_csv, synth_recording


def main() -> None:
    recording = synth_recording(duration_s=60.0, fps=240.0, seed=20240517)
    out = Path(__file__).resolve().parents[1] / "data" / "sample_scores.csv"
    out.parent.mkdir(exist_ok=True)
    atomic_write(out, recording_to_csv(recording))
    planted = len(recording.schedule)
    print(f"wrote {out} ({planted} planted blinks, {len(recording.left)} frames/eye)")


if __name__ == "__main__":
    main()
