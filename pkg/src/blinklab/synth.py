"""Synthetic EAR score generation for demos, fixtures, and benchmarks.

Produces a dual-eye recording with Gaussian-shaped blink dips planted on a
noisy baseline.  The returned schedule carries ground truth (apex frames,
depths, laterality) so tests can assert against the plant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .series import EarSeries


@dataclass(frozen=True)
class PlantedBlink:
    apex_frame: int  # left apex; the right apex is shifted by delay
    depth: float  # EAR drop at the apex, before noise
    half_width_frames: float
    delay_frames: int  # right minus left apex
    eyes: str  # both | left | right


@dataclass(frozen=True)
class SynthRecording:
    left: EarSeries
    right: EarSeries
    schedule: Tuple[PlantedBlink, ...]
    fps: float


def synth_recording(
    duration_s: float,
    fps: float,
    seed: int = 0,
    baseline: float = 0.30,
    noise_std: float = 0.006,
    complete_depth: Tuple[float, float] = (0.18, 0.26),
    partial_depth: Tuple[float, float] = (0.07, 0.11),
    partial_fraction: float = 0.3,
    unilateral_fraction: float = 0.05,
    mean_gap_s: float = 3.5,
    min_gap_s: float = 1.5,
    max_delay_ms: float = 40.0,
) -> SynthRecording:
    """Generate a two-eye recording with a known blink schedule."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * fps))
    left = baseline + rng.normal(0.0, noise_std, size=n)
    right = baseline + rng.normal(0.0, noise_std, size=n)

    schedule: List[PlantedBlink] = []
    margin = int(fps)  # keep blinks clear of the series edges
    t = margin + rng.integers(0, int(fps))
    while t < n - margin:
        partial = rng.random() < partial_fraction
        lo, hi = partial_depth if partial else complete_depth
        depth = float(rng.uniform(lo, hi))
        half_width = float(rng.uniform(0.02, 0.06) * fps)
        delay = int(rng.integers(-max_delay_ms, max_delay_ms + 1) / 1000.0 * fps)
        u = rng.random()
        if u < unilateral_fraction / 2:
            eyes = "left"
        elif u < unilateral_fraction:
            eyes = "right"
        else:
            eyes = "both"
        schedule.append(
            PlantedBlink(
                apex_frame=int(t),
                depth=depth,
                half_width_frames=half_width,
                delay_frames=delay,
                eyes=eyes,
            )
        )
        gap = max(min_gap_s, rng.exponential(mean_gap_s))
        t += int(gap * fps)

    frames = np.arange(n, dtype=np.float64)
    for blink in schedule:
        span = int(blink.half_width_frames * 5) + 1
        for eye, values, apex in (
            ("left", left, blink.apex_frame),
            ("right", right, blink.apex_frame + blink.delay_frames),
        ):
            if blink.eyes not in ("both", eye):
                continue
            lo = max(0, apex - span)
            hi = min(n, apex + span + 1)
            local = frames[lo:hi] - apex
            values[lo:hi] -= blink.depth * np.exp(
                -0.5 * (local / blink.half_width_frames) ** 2
            )

    np.clip(left, 0.0, 1.0, out=left)
    np.clip(right, 0.0, 1.0, out=right)
    valid = np.ones(n, dtype=bool)
    return SynthRecording(
        left=EarSeries(values=left, valid=valid, fps=fps, eye="left"),
        right=EarSeries(values=right, valid=valid.copy(), fps=fps, eye="right"),
        schedule=tuple(schedule),
        fps=fps,
    )


def recording_to_csv(recording: SynthRecording) -> bytes:
    """Serialize a synthetic recording as a standard score CSV."""
    from .io import export_scores

    return export_scores(
        [("EAR_2D_left", recording.left), ("EAR_2D_right", recording.right)]
    )
