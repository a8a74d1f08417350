"""Session-scoped HTTP API for reviewing and correcting blink detections.

JSON over HTTP under /api/v1/.  A session wraps one uploaded score file;
detection, manual state edits, statistics, and the summary all live on it.
Mutations are serialized per session and bump a version counter
(last-write-wins for concurrent edits); statistics recompute on demand
after an edit marks the session dirty.
"""

from __future__ import annotations

import json
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from .errors import BlinkError, InvalidInputError, MissingColumnError
from .peaks import PeakParams
from .pipeline import (
    BLINK_STATES,
    BlinkEvent,
    BlinkMatch,
    DetectionParams,
    detect_pair,
    set_blink_state,
)
from .series import ColumnSelection, EarSeries, auto_select_columns, load_score_csv
from .stats import compute_statistics, report_to_dict
from .summary import build_summary, render_summary_svg


class CreateSessionBody(BaseModel):
    csv: str = Field(min_length=1, description="score CSV content")
    fps: float
    left_column: Optional[str] = None
    right_column: Optional[str] = None


class PeakParamsBody(BaseModel):
    min_prominence: Optional[float] = None
    min_distance: Optional[float] = None
    min_width: Optional[float] = None
    max_width: Optional[float] = None
    rel_height: Optional[float] = None


class ParamsBody(BaseModel):
    left_column: Optional[str] = None
    right_column: Optional[str] = None
    peak: Optional[PeakParamsBody] = None
    smoothing_window: Optional[int] = None
    threshold_mode: Optional[str] = None
    manual_threshold_left: Optional[float] = None
    manual_threshold_right: Optional[float] = None
    max_match_delay_ms: Optional[float] = None
    otsu_bins: Optional[int] = None
    scatter_budget: Optional[int] = None
    rolling_window_s: Optional[float] = None


class PatchEventBody(BaseModel):
    state: str


class SnapshotBody(BaseModel):
    name: Optional[str] = None


class RestoreBody(BaseModel):
    name: str


@dataclass
class Session:
    id: str
    csv_text: str
    fps: float
    headers: List[str]
    auto_columns: Optional[ColumnSelection]
    columns: Optional[ColumnSelection]
    left: Optional[EarSeries] = None
    right: Optional[EarSeries] = None
    params: DetectionParams = field(default_factory=DetectionParams)
    scatter_budget: int = 4000
    rolling_window_s: float = 5.0
    events: List[BlinkEvent] = field(default_factory=list)
    matches: List[BlinkMatch] = field(default_factory=list)
    thresholds: Tuple[Optional[float], Optional[float]] = (None, None)
    warnings: List[str] = field(default_factory=list)
    detected: bool = False
    dirty: bool = False
    version: int = 0
    stats_cache: Optional[dict] = None
    lock: threading.RLock = field(default_factory=threading.RLock)

    def bump(self):
        self.version += 1


class ApiError(Exception):
    def __init__(self, status: int, message: str, errors: Optional[dict] = None):
        super().__init__(message)
        self.status = status
        self.payload = {"detail": message}
        if errors:
            self.payload["errors"] = errors


def _event_dict(event: BlinkEvent, fps: float) -> dict:
    return {
        "id": event.id,
        "eye": event.eye,
        "apex_frame": event.apex_frame,
        "apex_time_s": event.apex_frame / fps,
        "apex_ear": event.apex_ear,
        "prominence": event.prominence,
        "width_frames": event.width_frames,
        "height": event.height,
        "onset_frame": event.onset_frame,
        "offset_frame": event.offset_frame,
        "state": event.state,
        "state_source": event.state_source,
    }


def _match_dict(match: BlinkMatch) -> dict:
    return {"left_id": match.left_id, "right_id": match.right_id, "delay_ms": match.delay_ms}


class SessionStore:
    def __init__(self):
        self._sessions: Dict[str, Session] = {}
        self._lock = threading.Lock()

    def add(self, session: Session):
        with self._lock:
            self._sessions[session.id] = session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise ApiError(404, f"unknown session {session_id}")
        return session

    def remove(self, session_id: str):
        with self._lock:
            if session_id not in self._sessions:
                raise ApiError(404, f"unknown session {session_id}")
            del self._sessions[session_id]


def _load_session_series(session: Session):
    if session.columns is None:
        raise ApiError(400, "no usable column selection", {"columns": "set left/right columns"})
    try:
        session.left, session.right = load_score_csv(
            session.csv_text, session.columns, session.fps
        )
    except MissingColumnError as err:
        raise ApiError(400, str(err), {"columns": str(err)}) from err
    except BlinkError as err:
        raise ApiError(400, str(err), {"csv": str(err)}) from err


def create_app(
    snapshot_dir: Optional[Path] = None, ui_dir: Optional[Path] = None
) -> FastAPI:
    """Build the review service; state lives in the returned app instance."""
    app = FastAPI(title="blinklab review service", version="1.0")
    store = SessionStore()
    app.state.store = store
    app.state.snapshot_dir = Path(snapshot_dir) if snapshot_dir else None

    @app.exception_handler(ApiError)
    async def _api_error(_request: Request, err: ApiError):
        return JSONResponse(status_code=err.status, content=err.payload)

    @app.exception_handler(RequestValidationError)
    async def _validation_error(_request: Request, err: RequestValidationError):
        errors = {}
        for item in err.errors():
            loc = ".".join(str(p) for p in item["loc"] if p != "body")
            errors[loc or "body"] = item["msg"]
        return JSONResponse(
            status_code=400, content={"detail": "invalid request", "errors": errors}
        )

    def _session_state(session: Session) -> dict:
        return {
            "session_id": session.id,
            "version": session.version,
            "fps": session.fps,
            "n_frames": len(session.left) if session.left is not None else 0,
            "headers": session.headers,
            "auto_columns": _columns_dict(session.auto_columns),
            "columns": _columns_dict(session.columns),
            "detected": session.detected,
            "warnings": session.warnings,
        }

    def _columns_dict(selection: Optional[ColumnSelection]):
        if selection is None:
            return None
        return {"left": selection.left_column, "right": selection.right_column}

    @app.post("/api/v1/sessions", status_code=201)
    def create_session(body: CreateSessionBody):
        if body.fps <= 0:
            raise ApiError(400, "fps must be > 0", {"fps": "must be > 0"})
        from .io import sniff_headers

        try:
            headers = sniff_headers(body.csv)
        except BlinkError as err:
            raise ApiError(400, str(err), {"csv": str(err)}) from err
        auto = auto_select_columns(headers)
        columns = auto
        if body.left_column and body.right_column:
            try:
                columns = ColumnSelection(body.left_column, body.right_column)
            except InvalidInputError as err:
                raise ApiError(400, str(err), {"columns": str(err)}) from err
        session = Session(
            id=uuid.uuid4().hex,
            csv_text=body.csv,
            fps=body.fps,
            headers=headers,
            auto_columns=auto,
            columns=columns,
        )
        if session.columns is not None:
            with session.lock:
                _load_session_series(session)
        store.add(session)
        return _session_state(session)

    @app.get("/api/v1/sessions/{session_id}")
    def get_session(session_id: str):
        return _session_state(store.get(session_id))

    @app.get("/api/v1/sessions/{session_id}/columns")
    def get_columns(session_id: str):
        session = store.get(session_id)
        return {
            "headers": session.headers,
            "auto": _columns_dict(session.auto_columns),
            "selected": _columns_dict(session.columns),
        }

    @app.put("/api/v1/sessions/{session_id}/params")
    def put_params(session_id: str, body: ParamsBody):
        session = store.get(session_id)
        with session.lock:
            if (body.left_column is None) != (body.right_column is None):
                raise ApiError(400, "both columns must be set together",
                               {"columns": "set left and right together"})
            try:
                current = session.params
                peak_kwargs = {
                    "min_prominence": current.peak.min_prominence,
                    "min_distance": current.peak.min_distance,
                    "min_width": current.peak.min_width,
                    "max_width": current.peak.max_width,
                    "rel_height": current.peak.rel_height,
                }
                if body.peak is not None:
                    for key, value in body.peak.model_dump(exclude_none=True).items():
                        peak_kwargs[key] = value
                kwargs = {
                    "peak": PeakParams(**peak_kwargs),
                    "smoothing_window": body.smoothing_window
                    if body.smoothing_window is not None else current.smoothing_window,
                    "threshold_mode": body.threshold_mode or current.threshold_mode,
                    "manual_threshold_left": body.manual_threshold_left
                    if body.manual_threshold_left is not None else current.manual_threshold_left,
                    "manual_threshold_right": body.manual_threshold_right
                    if body.manual_threshold_right is not None else current.manual_threshold_right,
                    "max_match_delay_ms": body.max_match_delay_ms
                    if body.max_match_delay_ms is not None else current.max_match_delay_ms,
                    "otsu_bins": body.otsu_bins
                    if body.otsu_bins is not None else current.otsu_bins,
                }
                session.params = DetectionParams(**kwargs)
            except InvalidInputError as err:
                raise ApiError(400, str(err), {"params": str(err)}) from err
            if body.scatter_budget is not None:
                if body.scatter_budget < 1000:
                    raise ApiError(400, "scatter_budget must be >= 1000",
                                   {"scatter_budget": "must be >= 1000"})
                session.scatter_budget = body.scatter_budget
            if body.rolling_window_s is not None:
                session.rolling_window_s = body.rolling_window_s
            if body.left_column and body.right_column:
                try:
                    session.columns = ColumnSelection(body.left_column, body.right_column)
                except InvalidInputError as err:
                    raise ApiError(400, str(err), {"columns": str(err)}) from err
                _load_session_series(session)
            session.bump()
            return {"version": session.version, "params": _params_dict(session)}

    def _params_dict(session: Session) -> dict:
        p = session.params
        return {
            "peak": {
                "min_prominence": p.peak.min_prominence,
                "min_distance": p.peak.min_distance,
                "min_width": p.peak.min_width,
                "max_width": p.peak.max_width,
                "rel_height": p.peak.rel_height,
            },
            "smoothing_window": p.smoothing_window,
            "threshold_mode": p.threshold_mode,
            "manual_threshold_left": p.manual_threshold_left,
            "manual_threshold_right": p.manual_threshold_right,
            "max_match_delay_ms": p.max_match_delay_ms,
            "otsu_bins": p.otsu_bins,
            "scatter_budget": session.scatter_budget,
            "rolling_window_s": session.rolling_window_s,
        }

    @app.get("/api/v1/sessions/{session_id}/params")
    def get_params(session_id: str):
        session = store.get(session_id)
        return {"version": session.version, "params": _params_dict(session)}

    @app.post("/api/v1/sessions/{session_id}/detect")
    def run_detection(session_id: str):
        session = store.get(session_id)
        with session.lock:
            if session.left is None:
                _load_session_series(session)
            warnings = []
            if any(e.state_source == "manual" for e in session.events):
                warnings.append("re-running detection cleared previous manual edits")
            try:
                result = detect_pair(session.left, session.right, session.params)
            except BlinkError as err:
                raise ApiError(400, str(err), {"detect": str(err)}) from err
            session.events = result.events
            session.matches = list(result.matches)
            session.thresholds = (result.threshold_left, result.threshold_right)
            session.warnings = list(result.warnings) + warnings
            session.detected = True
            session.dirty = True
            session.stats_cache = None
            session.bump()
            return {
                "version": session.version,
                "n_left": sum(1 for e in session.events if e.eye == "left"),
                "n_right": sum(1 for e in session.events if e.eye == "right"),
                "n_matches": len(session.matches),
                "threshold_left": result.threshold_left,
                "threshold_right": result.threshold_right,
                "warnings": session.warnings,
            }

    def _require_detected(session: Session):
        if not session.detected:
            raise ApiError(409, "detection has not been run for this session")

    @app.get("/api/v1/sessions/{session_id}/events")
    def list_events(session_id: str, page: int = 1, page_size: int = 200):
        session = store.get(session_id)
        _require_detected(session)
        if page < 1 or page_size < 1:
            raise ApiError(400, "page and page_size must be >= 1",
                           {"page": "must be >= 1"})
        events = sorted(session.events, key=lambda e: (e.apex_frame, e.eye, e.id))
        start = (page - 1) * page_size
        return {
            "version": session.version,
            "total": len(events),
            "page": page,
            "page_size": page_size,
            "events": [_event_dict(e, session.fps) for e in events[start : start + page_size]],
        }

    @app.patch("/api/v1/sessions/{session_id}/events/{event_id}")
    def patch_event(session_id: str, event_id: int, body: PatchEventBody):
        session = store.get(session_id)
        _require_detected(session)
        if body.state not in BLINK_STATES:
            raise ApiError(400, f"state must be one of {BLINK_STATES}",
                           {"state": f"must be one of {BLINK_STATES}"})
        with session.lock:
            try:
                session.events = set_blink_state(session.events, event_id, body.state)
            except InvalidInputError as err:
                raise ApiError(404, str(err)) from err
            session.dirty = True
            session.stats_cache = None
            session.bump()
            event = next(e for e in session.events if e.id == event_id)
            return {"version": session.version, "event": _event_dict(event, session.fps)}

    @app.get("/api/v1/sessions/{session_id}/matches")
    def list_matches(session_id: str):
        session = store.get(session_id)
        _require_detected(session)
        return {
            "version": session.version,
            "matches": [_match_dict(m) for m in session.matches],
        }

    def _compute_stats(session: Session) -> dict:
        if session.stats_cache is None or session.dirty:
            left_events = [e for e in session.events if e.eye == "left"]
            right_events = [e for e in session.events if e.eye == "right"]
            report = compute_statistics(
                left_events, right_events, session.left, session.right,
                session.thresholds, session.fps,
            )
            session.stats_cache = report_to_dict(report)
            session.dirty = False
        return session.stats_cache

    @app.get("/api/v1/sessions/{session_id}/stats")
    def get_stats(session_id: str):
        session = store.get(session_id)
        _require_detected(session)
        with session.lock:
            return {"version": session.version, "stats": _compute_stats(session)}

    def _bundle(session: Session):
        return build_summary(
            session.left, session.right, session.events, session.matches,
            session.fps, scatter_budget=session.scatter_budget,
            rolling_window_s=session.rolling_window_s,
            max_match_delay_ms=session.params.max_match_delay_ms,
        )

    @app.get("/api/v1/sessions/{session_id}/summary")
    def get_summary(session_id: str):
        session = store.get(session_id)
        _require_detected(session)
        with session.lock:
            return {"version": session.version, "summary": _bundle(session).to_json_dict()}

    @app.get("/api/v1/sessions/{session_id}/summary.svg")
    def get_summary_svg(session_id: str):
        session = store.get(session_id)
        _require_detected(session)
        with session.lock:
            svg = render_summary_svg(_bundle(session))
        return Response(content=svg, media_type="image/svg+xml")

    @app.get("/api/v1/sessions/{session_id}/series")
    def get_series(
        session_id: str, start_frame: int = 0,
        end_frame: Optional[int] = None, max_points: int = 2000,
    ):
        session = store.get(session_id)
        if session.left is None:
            raise ApiError(409, "session has no loaded series")
        if max_points < 1:
            raise ApiError(400, "max_points must be >= 1", {"max_points": "must be >= 1"})
        n = len(session.left)
        start = max(0, start_frame)
        end = n if end_frame is None else min(n, end_frame)
        if end <= start:
            raise ApiError(400, "empty frame window", {"end_frame": "must exceed start_frame"})
        stride = max(1, (end - start + max_points - 1) // max_points)

        def slice_eye(series: EarSeries) -> dict:
            idx = list(range(start, end, stride))
            if idx[-1] != end - 1:
                idx.append(end - 1)
            pts = [
                (i / session.fps, float(series.values[i]))
                for i in idx
                if bool(series.valid[i])
            ]
            return {
                "time_s": [t for t, _ in pts],
                "value": [v for _, v in pts],
            }

        return {
            "version": session.version,
            "start_frame": start,
            "end_frame": end,
            "stride": stride,
            "left": slice_eye(session.left),
            "right": slice_eye(session.right),
        }

    @app.delete("/api/v1/sessions/{session_id}", status_code=204)
    def delete_session(session_id: str):
        store.remove(session_id)
        return Response(status_code=204)

    def _snapshot_path(name: str) -> Path:
        directory = app.state.snapshot_dir
        if directory is None:
            raise ApiError(409, "snapshot directory not configured")
        safe = Path(name).name  # filenames only; no directory escape
        if not safe.endswith(".json"):
            safe += ".json"
        directory.mkdir(parents=True, exist_ok=True)
        return directory / safe

    @app.post("/api/v1/sessions/{session_id}/snapshot")
    def save_snapshot(session_id: str, body: SnapshotBody):
        session = store.get(session_id)
        with session.lock:
            payload = {
                "csv": session.csv_text,
                "fps": session.fps,
                "columns": _columns_dict(session.columns),
                "params": _params_dict(session),
                "manual_states": [
                    {"id": e.id, "state": e.state}
                    for e in session.events
                    if e.state_source == "manual"
                ],
                "detected": session.detected,
            }
        path = _snapshot_path(body.name or session.id)
        path.write_text(json.dumps(payload), encoding="utf-8")
        return {"path": str(path)}

    @app.post("/api/v1/sessions/restore", status_code=201)
    def restore_snapshot(body: RestoreBody):
        path = _snapshot_path(body.name)
        if not path.exists():
            raise ApiError(404, f"no snapshot named {body.name!r}")
        payload = json.loads(path.read_text(encoding="utf-8"))
        created = create_session(
            CreateSessionBody(
                csv=payload["csv"],
                fps=payload["fps"],
                left_column=(payload.get("columns") or {}).get("left"),
                right_column=(payload.get("columns") or {}).get("right"),
            )
        )
        session = store.get(created["session_id"])
        params = payload.get("params", {})
        peak = params.get("peak", {})
        put_params(session.id, ParamsBody(
            peak=PeakParamsBody(**peak),
            smoothing_window=params.get("smoothing_window"),
            threshold_mode=params.get("threshold_mode"),
            manual_threshold_left=params.get("manual_threshold_left"),
            manual_threshold_right=params.get("manual_threshold_right"),
            max_match_delay_ms=params.get("max_match_delay_ms"),
            otsu_bins=params.get("otsu_bins"),
            scatter_budget=params.get("scatter_budget"),
            rolling_window_s=params.get("rolling_window_s"),
        ))
        if payload.get("detected"):
            run_detection(session.id)
            with session.lock:
                for edit in payload.get("manual_states", []):
                    try:
                        session.events = set_blink_state(
                            session.events, edit["id"], edit["state"]
                        )
                    except InvalidInputError:
                        continue  # detection changed; stale ids are dropped
                session.dirty = True
                session.stats_cache = None
                session.bump()
        return _session_state(session)

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
