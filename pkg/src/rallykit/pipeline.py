"""End-to-end pipeline from a track file to a persisted anchor store, plus
playback hints for the annotator's auto-slowdown behavior."""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from . import scenes, scores, tracks
from .errors import DegenerateClusters, MatchNotFound, PipelineError
from .events import (
    DetectionParams,
    detect_bounces,
    detect_hits,
    hand_distance,
    assign_players,
    velocity,
)
from .scores import RallySpan
from .store import (
    RALLY,
    UNCALIBRATED,
    DETECTED,
    EventAnchor,
    MatchStore,
    MutationRecord,
    detected_anchor_id,
    rally_anchor_id,
)

DEFAULT_SLOWDOWN_LEAD = 25
DEFAULT_SLOWDOWN_RATE = 0.25


@dataclass(frozen=True)
class SlowdownWindow:
    frame_from: int
    frame_to: int
    rate: float
    pause_at: int


@dataclass(frozen=True)
class PipelineConfig:
    max_gap: int = tracks.DEFAULT_MAX_GAP
    min_conf: float = scores.DEFAULT_MIN_CONF
    scene_window: int = scenes.DEFAULT_WINDOW
    min_segment_len: int = scenes.DEFAULT_MIN_LEN
    first_server: str = scores.SIDE_A
    slowdown_lead: int = DEFAULT_SLOWDOWN_LEAD
    slowdown_rate: float = DEFAULT_SLOWDOWN_RATE
    metrics_gap: int = 3
    detection: DetectionParams = field(default_factory=DetectionParams)

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        raw = json.loads(Path(path).read_text())
        det = DetectionParams(**raw.pop("detection", {}))
        return cls(detection=det, **raw)

    def with_overrides(self, **kwargs) -> "PipelineConfig":
        det_fields = {f.name for f in fields(DetectionParams)}
        det_kwargs = {k: v for k, v in kwargs.items() if k in det_fields}
        top_kwargs = {k: v for k, v in kwargs.items()
                      if k not in det_fields and v is not None}
        det = replace(self.detection, **{k: v for k, v in det_kwargs.items()
                                         if v is not None})
        return replace(self, detection=det, **top_kwargs)


def match_id_for(track_bytes: bytes) -> str:
    return "m" + hashlib.sha256(track_bytes).hexdigest()[:12]


def _stage(name: str):
    def wrap(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(name, exc) from exc
    return wrap


def detect_match(track_bytes: bytes, config: PipelineConfig = PipelineConfig()
                 ) -> tuple[str, tracks.TrackSet, list[RallySpan], list[EventAnchor],
                            tracks.ParseReport, list[str]]:
    """Run ingest through event detection; returns everything the store needs.

    Module errors propagate wrapped in PipelineError with the stage tag.
    Per-rally player-clustering failures downgrade to warnings: bounces are
    still detectable without player tracks, and one broken rally should not
    sink a whole match.
    """
    warnings: list[str] = []
    match_id = match_id_for(track_bytes)

    def ingest():
        ts, report = tracks.parse_track_file(track_bytes)
        ball = tracks.interpolate_ball(ts.ball, config.max_gap)
        return ts, ball, report

    ts, ball, report = _stage("ingest")(ingest)
    states = _stage("scores")(scores.clean_scores, list(ts.scores), config.min_conf)
    segs = _stage("scenes")(
        lambda: scenes.segments(
            scenes.smooth_labels(list(ts.scenes), config.scene_window),
            config.min_segment_len))
    local_rallies = _stage("rallies")(scores.rally_boundaries, states, segs,
                                      config.first_server)
    # rally ids become globally unique once they belong to a match
    rallies = [replace(r, rally_id=f"{match_id}:{r.rally_id}")
               for r in local_rallies]

    params = config.detection.scaled_for(ts.meta.width)
    anchors: list[EventAnchor] = []

    def detect_rally_events(rally: RallySpan) -> None:
        track = ball.slice(rally.frame_start, rally.frame_end)
        vel = velocity(track, params.smoothing_window)
        events = list(detect_bounces(vel, track, ts.court, params))
        poses = [p for p in ts.poses
                 if rally.frame_start <= p.frame <= rally.frame_end]
        try:
            players = assign_players(poses, ts.court, params)
            dist = hand_distance(track, players)
            events.extend(detect_hits(vel, dist, params))
        except DegenerateClusters as exc:
            warnings.append(f"{rally.rally_id}: player clustering failed ({exc}); "
                            "hits skipped")
        events.sort(key=lambda e: (e.frame, e.event_type))
        anchors.append(EventAnchor(
            anchor_id=rally_anchor_id(rally.rally_id),
            rally_id=rally.rally_id, event_type=RALLY,
            frame_start=rally.frame_start, frame_end=rally.frame_end,
            x=None, y=None, status=UNCALIBRATED, origin=DETECTED))
        for i, e in enumerate(events):
            anchors.append(EventAnchor(
                anchor_id=detected_anchor_id(rally.rally_id, i),
                rally_id=rally.rally_id, event_type=e.event_type,
                frame_start=e.frame, frame_end=e.frame,
                x=e.x, y=e.y, status=UNCALIBRATED, origin=DETECTED))

    for rally in rallies:
        _stage("events")(detect_rally_events, rally)

    return match_id, ts, rallies, anchors, report, warnings


def playback_hints(store: MatchStore, rally_id: str,
                   lead: int = DEFAULT_SLOWDOWN_LEAD,
                   rate: float = DEFAULT_SLOWDOWN_RATE) -> list[SlowdownWindow]:
    """One slowdown window per uncalibrated, non-deleted anchor of the rally.

    Windows of anchors closer than the lead keep both pause points and split
    at the midpoint between them, so the result is disjoint and ordered.
    """
    anchors = store.list_anchors(rally_id)
    pauses = sorted({a.frame_start for a in anchors if a.status == UNCALIBRATED})
    windows = [SlowdownWindow(max(0, p - lead), p, rate, p) for p in pauses]
    for i in range(len(windows) - 1):
        cur, nxt = windows[i], windows[i + 1]
        if nxt.frame_from <= cur.frame_to:
            mid = (cur.pause_at + nxt.pause_at) // 2
            windows[i] = replace(cur, frame_to=mid)
            windows[i + 1] = replace(nxt, frame_from=mid + 1)
    return windows


class MatchRepository:
    """Disk-backed collection of match stores.

    Layout per match: <dir>/<match_id>/baseline.json holds the detected state,
    <dir>/<match_id>/mutations.jsonl is the append-only log.  Loading replays
    the log over the baseline; the in-memory store then appends new mutations
    to the same file.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._stores: dict[str, MatchStore] = {}
        self._lock = threading.Lock()

    # -- pipeline entry point --------------------------------------------------

    def run_pipeline(self, track_bytes: bytes,
                     config: PipelineConfig = PipelineConfig(),
                     video_url: str | None = None) -> str:
        match_id, ts, rallies, anchors, report, warnings = detect_match(
            track_bytes, config)
        baseline = {
            "match_id": match_id,
            "frame_count": ts.meta.frame_count,
            "fps": ts.meta.fps,
            "width": ts.meta.width,
            "height": ts.meta.height,
            "video_url": video_url,
            "parse_issues": len(report.issues),
            "warnings": warnings,
            "rallies": [_rally_dict(r) for r in rallies],
            "anchors": [_anchor_dict(a) for a in anchors],
        }
        mdir = self.root / match_id
        mdir.mkdir(parents=True, exist_ok=True)
        (mdir / "baseline.json").write_text(
            json.dumps(baseline, sort_keys=True, indent=1))
        log_path = mdir / "mutations.jsonl"
        if not log_path.exists():
            log_path.touch()
        with self._lock:
            self._stores.pop(match_id, None)  # force reload from disk
        return match_id

    # -- access ------------------------------------------------------------------

    def match_ids(self) -> list[str]:
        ids = {p.name for p in self.root.iterdir()
               if (p / "baseline.json").exists()}
        return sorted(ids)

    def store(self, match_id: str) -> MatchStore:
        with self._lock:
            st = self._stores.get(match_id)
            if st is not None:
                return st
            st = self._load(match_id)
            self._stores[match_id] = st
            return st

    def store_for_rally(self, rally_id: str) -> MatchStore:
        # global rally ids are "<match_id>:<local rally id>"
        match_id = rally_id.split(":", 1)[0]
        return self.store(match_id)

    def _vocabulary(self) -> dict[str, tuple[str, ...]] | None:
        # store-wide override: <dir>/vocabulary.json maps context type -> values
        path = self.root / "vocabulary.json"
        if not path.exists():
            return None
        raw = json.loads(path.read_text())
        return {k: tuple(v) for k, v in raw.items()}

    def _load(self, match_id: str) -> MatchStore:
        mdir = self.root / match_id
        baseline_path = mdir / "baseline.json"
        if not baseline_path.exists():
            raise MatchNotFound(f"no match {match_id!r} in {self.root}")
        d = json.loads(baseline_path.read_text())
        rallies = [_rally_from_dict(r) for r in d["rallies"]]
        anchors = [_anchor_from_dict(a) for a in d["anchors"]]
        store = MatchStore(
            match_id=match_id,
            rallies=rallies,
            anchors=anchors,
            frame_count=d["frame_count"],
            vocabulary=self._vocabulary(),
            video_url=d.get("video_url"),
            meta={"fps": d.get("fps"), "width": d.get("width"),
                  "height": d.get("height")},
        )
        log_path = mdir / "mutations.jsonl"
        if log_path.exists():
            records = [MutationRecord.from_line(line)
                       for line in log_path.read_text().splitlines() if line]
            store.replay(records)
        fh = open(log_path, "a", encoding="utf-8")

        def sink(line: str, _fh=fh) -> None:
            _fh.write(line + "\n")
            _fh.flush()

        store.log_sink = sink
        return store


def _rally_dict(r: RallySpan) -> dict:
    return {"rally_id": r.rally_id, "game_index": r.game_index,
            "frame_start": r.frame_start, "frame_end": r.frame_end,
            "server": r.server, "winner": r.winner, "flagged": r.flagged}


def _rally_from_dict(d: dict) -> RallySpan:
    return RallySpan(rally_id=d["rally_id"], game_index=d["game_index"],
                     frame_start=d["frame_start"], frame_end=d["frame_end"],
                     server=d["server"], winner=d["winner"],
                     flagged=d.get("flagged", False))


def _anchor_dict(a: EventAnchor) -> dict:
    return {"anchor_id": a.anchor_id, "rally_id": a.rally_id,
            "event_type": a.event_type, "frame_start": a.frame_start,
            "frame_end": a.frame_end, "x": a.x, "y": a.y,
            "status": a.status, "origin": a.origin}


def _anchor_from_dict(d: dict) -> EventAnchor:
    return EventAnchor(anchor_id=d["anchor_id"], rally_id=d["rally_id"],
                       event_type=d["event_type"],
                       frame_start=d["frame_start"], frame_end=d["frame_end"],
                       x=d.get("x"), y=d.get("y"),
                       status=d["status"], origin=d["origin"])
