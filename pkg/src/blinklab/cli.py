"""Command-line interface: the batch path through the full pipeline.

Subcommands: ear (landmark CSV -> score CSV), detect (score CSV -> blink
table), stats, summary, all (everything), serve (review HTTP service).
Exit codes: 0 success, 1 input/usage error, 2 internal error.  Logs go to
stderr so stdout stays clean for shells.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import io as bio
from .ear import ear_series_from_landmarks
from .errors import BlinkError
from .peaks import PeakParams
from .pipeline import DetectionParams, detect_pair
from .series import ColumnSelection, auto_select_columns, load_score_csv
from .stats import compute_statistics
from .summary import build_summary, render_summary_svg

log = logging.getLogger("blinklab")

DEFAULT_HOST = os.environ.get("BLINKLAB_HOST", "127.0.0.1")
DEFAULT_PORT = int(os.environ.get("BLINKLAB_PORT", "8377"))


class _UsageError(Exception):
    def __init__(self, parser: argparse.ArgumentParser, message: str):
        super().__init__(message)
        self.parser = parser


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract wants 1
    def error(self, message):
        raise _UsageError(self, message)


# keys accepted in --params files; values parse like the matching flag
_PARAM_KEYS = (
    "min_prominence", "min_distance", "min_width", "max_width", "rel_height",
    "smoothing_window", "threshold_mode", "threshold_left", "threshold_right",
    "max_match_delay_ms", "otsu_bins", "scatter_budget", "rolling_window_s",
)


def _read_params_file(path: Path) -> dict:
    values = {}
    for ln, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise BlinkError(f"{path}:{ln}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _PARAM_KEYS:
            raise BlinkError(f"{path}:{ln}: unknown parameter {key!r}")
        values[key] = value.strip()
    return values


def _coalesce(args, file_values: dict, key: str, cast, default):
    flag = getattr(args, key, None)
    if flag is not None:
        return flag
    if key in file_values:
        raw = file_values[key]
        if raw.lower() in ("none", ""):
            return None
        return cast(raw)
    return default


def _detection_params(args) -> DetectionParams:
    file_values = _read_params_file(Path(args.params)) if getattr(args, "params", None) else {}
    peak = PeakParams(
        min_prominence=_coalesce(args, file_values, "min_prominence", float, 0.05),
        min_distance=_coalesce(args, file_values, "min_distance", float, 15),
        min_width=_coalesce(args, file_values, "min_width", float, 3.0),
        max_width=_coalesce(args, file_values, "max_width", float, None),
        rel_height=_coalesce(args, file_values, "rel_height", float, 0.5),
    )
    return DetectionParams(
        peak=peak,
        smoothing_window=_coalesce(args, file_values, "smoothing_window", int, None),
        threshold_mode=_coalesce(args, file_values, "threshold_mode", str, "auto"),
        manual_threshold_left=_coalesce(args, file_values, "threshold_left", float, None),
        manual_threshold_right=_coalesce(args, file_values, "threshold_right", float, None),
        max_match_delay_ms=_coalesce(args, file_values, "max_match_delay_ms", float, 500.0),
        otsu_bins=int(_coalesce(args, file_values, "otsu_bins", int, 256)),
    )


def _summary_options(args) -> dict:
    file_values = _read_params_file(Path(args.params)) if getattr(args, "params", None) else {}
    return {
        "scatter_budget": int(_coalesce(args, file_values, "scatter_budget", int, 4000)),
        "rolling_window_s": float(_coalesce(args, file_values, "rolling_window_s", float, 5.0)),
    }


def _load_series(args):
    path = Path(args.input)
    with open(path, "rb") as fh:
        headers = bio.sniff_headers(fh)
    if bio.looks_like_landmark_header(headers):
        raise BlinkError(
            f"{path} looks like a landmark CSV; run the 'ear' subcommand first"
        )
    if args.left_column and args.right_column:
        selection = ColumnSelection(args.left_column, args.right_column)
    else:
        selection = auto_select_columns(headers)
        if selection is None:
            raise BlinkError(
                "could not auto-select EAR columns from header "
                f"{headers}; pass --left-column/--right-column"
            )
        log.info("auto-selected columns: left=%s right=%s",
                 selection.left_column, selection.right_column)
    with open(path, "rb") as fh:
        return load_score_csv(fh, selection, args.fps)


def _emit(out_dir: Path, name: str, data: bytes) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    bio.atomic_write(out_dir / name, data)
    log.info("wrote %s", out_dir / name)


def _cmd_ear(args) -> int:
    with open(args.input, "rb") as fh:
        frames, has_z = bio.load_landmarks_csv(fh)
    left2, right2 = ear_series_from_landmarks(frames, args.fps, mode="2d")
    columns = [
        (bio.SCORE_COLUMNS_2D[0], left2),
        (bio.SCORE_COLUMNS_2D[1], right2),
    ]
    if has_z:
        left3, right3 = ear_series_from_landmarks(frames, args.fps, mode="3d")
        columns += [
            (bio.SCORE_COLUMNS_3D[0], left3),
            (bio.SCORE_COLUMNS_3D[1], right3),
        ]
    _emit(Path(args.out), "scores.csv", bio.export_scores(columns))
    return 0


def _run_detection(args):
    left, right = _load_series(args)
    params = _detection_params(args)
    result = detect_pair(left, right, params)
    for warning in result.warnings:
        log.warning("%s", warning)
    return left, right, params, result


def _cmd_detect(args) -> int:
    left, _right, _params, result = _run_detection(args)
    _emit(Path(args.out), "blinks.csv",
          bio.export_blinks(result.left_events, result.right_events, result.matches, left.fps))
    return 0


def _cmd_stats(args) -> int:
    left, right, _params, result = _run_detection(args)
    report = compute_statistics(
        result.left_events, result.right_events, left, right,
        (result.threshold_left, result.threshold_right), left.fps,
    )
    out = Path(args.out)
    _emit(out, "stats.csv", bio.export_stats_csv(report))
    _emit(out, "stats.json", bio.export_stats_json(report))
    return 0


def _cmd_summary(args) -> int:
    left, right, params, result = _run_detection(args)
    options = _summary_options(args)
    bundle = build_summary(
        left, right, result.events, result.matches, left.fps,
        scatter_budget=options["scatter_budget"],
        rolling_window_s=options["rolling_window_s"],
        max_match_delay_ms=params.max_match_delay_ms,
    )
    out = Path(args.out)
    _emit(out, "summary.svg", render_summary_svg(bundle))
    _emit(out, "summary.json", (json.dumps(bundle.to_json_dict()) + "\n").encode())
    return 0


def _cmd_all(args) -> int:
    left, right, params, result = _run_detection(args)
    out = Path(args.out)
    _emit(out, "blinks.csv",
          bio.export_blinks(result.left_events, result.right_events, result.matches, left.fps))
    report = compute_statistics(
        result.left_events, result.right_events, left, right,
        (result.threshold_left, result.threshold_right), left.fps,
    )
    _emit(out, "stats.csv", bio.export_stats_csv(report))
    _emit(out, "stats.json", bio.export_stats_json(report))
    options = _summary_options(args)
    bundle = build_summary(
        left, right, result.events, result.matches, left.fps,
        scatter_budget=options["scatter_budget"],
        rolling_window_s=options["rolling_window_s"],
        max_match_delay_ms=params.max_match_delay_ms,
    )
    _emit(out, "summary.svg", render_summary_svg(bundle))
    _emit(out, "summary.json", (json.dumps(bundle.to_json_dict()) + "\n").encode())
    return 0


def _default_ui_dir() -> Optional[Path]:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    ui_dir = Path(args.ui_dir) if args.ui_dir else _default_ui_dir()
    if ui_dir is not None:
        log.info("serving review UI from %s at /ui", ui_dir)
    app = create_app(
        snapshot_dir=Path(args.snapshot_dir) if args.snapshot_dir else None,
        ui_dir=ui_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def _add_io_args(p: argparse.ArgumentParser, fps_required: bool = True):
    p.add_argument("--input", "-i", required=True, help="input CSV path")
    p.add_argument("--out", "-o", default=".", help="output directory")
    p.add_argument("--fps", type=float, required=fps_required,
                   help="frames per second of the recording")


def _add_detection_args(p: argparse.ArgumentParser):
    p.add_argument("--left-column", help="score column for the left eye")
    p.add_argument("--right-column", help="score column for the right eye")
    p.add_argument("--params", help="key=value parameter file")
    p.add_argument("--min-prominence", type=float, dest="min_prominence")
    p.add_argument("--min-distance", type=float, dest="min_distance")
    p.add_argument("--min-width", type=float, dest="min_width")
    p.add_argument("--max-width", type=float, dest="max_width")
    p.add_argument("--rel-height", type=float, dest="rel_height")
    p.add_argument("--smoothing-window", type=int, dest="smoothing_window")
    p.add_argument("--threshold-mode", choices=("auto", "manual"), dest="threshold_mode")
    p.add_argument("--threshold-left", type=float, dest="threshold_left")
    p.add_argument("--threshold-right", type=float, dest="threshold_right")
    p.add_argument("--max-match-delay-ms", type=float, dest="max_match_delay_ms")
    p.add_argument("--otsu-bins", type=int, dest="otsu_bins")


def _add_summary_args(p: argparse.ArgumentParser):
    p.add_argument("--scatter-budget", type=int, dest="scatter_budget")
    p.add_argument("--rolling-window-s", type=float, dest="rolling_window_s")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="blinklab", description="Blink analysis for EAR time series")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ear", help="compute EAR scores from a landmark CSV")
    _add_io_args(p)
    p.set_defaults(func=_cmd_ear)

    p = sub.add_parser("detect", help="detect and classify blinks in a score CSV")
    _add_io_args(p)
    _add_detection_args(p)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("stats", help="compute blink statistics from a score CSV")
    _add_io_args(p)
    _add_detection_args(p)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("summary", help="render the visual summary from a score CSV")
    _add_io_args(p)
    _add_detection_args(p)
    _add_summary_args(p)
    p.set_defaults(func=_cmd_summary)

    p = sub.add_parser("all", help="run the full pipeline and write every artifact")
    _add_io_args(p)
    _add_detection_args(p)
    _add_summary_args(p)
    p.set_defaults(func=_cmd_all)

    p = sub.add_parser("serve", help="start the review HTTP service")
    p.add_argument("--host", default=DEFAULT_HOST)
    p.add_argument("--port", type=int, default=DEFAULT_PORT)
    p.add_argument("--snapshot-dir", help="directory for session snapshots")
    p.add_argument("--ui-dir", help="built review UI to mount at /ui "
                                    "(default: frontend/dist when present)")
    p.set_defaults(func=_cmd_serve)

    return parser


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    logging.basicConfig(
        stream=sys.stderr, level=logging.INFO,
        format="%(levelname)s %(name)s: %(message)s", force=True,
    )
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except _UsageError as err:
        err.parser.print_usage(sys.stderr)
        print(f"error: {err}", file=sys.stderr)
        return 1
    except SystemExit as exit_:  # --help and friends
        return int(exit_.code or 0)
    try:
        return args.func(args)
    except (BlinkError, OSError) as err:
        log.error("%s", err)
        return 1
    except Exception:
        log.exception("internal error")
        return 2


def main() -> None:
    sys.exit(run_cli())
