"""Ingest per-frame object tracks produced by external CV tooling.

The on-disk format is newline-delimited text, one record per line:

    <kind> key=value key=value ...

Record kinds and required keys:

    meta   frame_count fps width height
    court  x0 y0 x1 y1 x2 y2 x3 y3 net_x table_y_min table_y_max
    ball   frame x y conf
    pose   frame box_cx box_cy box_w box_h neck_x neck_y neck_conf
           [lhand_x lhand_y lhand_conf] [rhand_x rhand_y rhand_conf]
    score  frame a b conf
    scene  frame in_play

Unknown keys are ignored, unknown record kinds are reported and the line is
skipped.  Malformed lines are never fatal; they land in the parse report.  The
only fatal condition is a missing header (no ``meta`` or no ``court`` record).

Coordinates are image pixels, origin top-left, y pointing down.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

from .errors import MissingHeader


@dataclass(frozen=True)
class VideoMeta:
    frame_count: int
    fps: float
    width: int
    height: int


@dataclass(frozen=True)
class BallSample:
    frame: int
    x: float
    y: float
    confidence: float


@dataclass(frozen=True)
class BallTrack:
    """Sparse ball positions, strictly increasing in frame."""

    samples: tuple[BallSample, ...]

    def frames(self) -> list[int]:
        return [s.frame for s in self.samples]

    def by_frame(self) -> dict[int, BallSample]:
        return {s.frame: s for s in self.samples}

    def slice(self, frame_start: int, frame_end: int) -> "BallTrack":
        return BallTrack(tuple(s for s in self.samples
                               if frame_start <= s.frame <= frame_end))


@dataclass(frozen=True)
class Keypoint:
    x: float
    y: float
    confidence: float


@dataclass(frozen=True)
class PoseBox:
    cx: float
    cy: float
    w: float
    h: float
    neck: Keypoint
    lhand: Keypoint | None = None
    rhand: Keypoint | None = None

    def hands(self) -> list[Keypoint]:
        return [k for k in (self.lhand, self.rhand) if k is not None]


@dataclass(frozen=True)
class PoseFrame:
    frame: int
    boxes: tuple[PoseBox, ...]


@dataclass(frozen=True)
class ScoreReading:
    frame: int
    score_a: int
    score_b: int
    confidence: float


@dataclass(frozen=True)
class SceneLabel:
    frame: int
    in_play: bool


@dataclass(frozen=True)
class CourtRegion:
    """Table quadrilateral plus the net line and the table-surface y band."""

    quad: tuple[tuple[float, float], ...]
    net_x: float
    table_y_min: float
    table_y_max: float

    def x_range(self) -> tuple[float, float]:
        xs = [p[0] for p in self.quad]
        return min(xs), max(xs)

    def is_convex(self) -> bool:
        n = len(self.quad)
        if n != 4:
            return False
        sign = 0
        for i in range(n):
            ax, ay = self.quad[i]
            bx, by = self.quad[(i + 1) % n]
            cx, cy = self.quad[(i + 2) % n]
            cross = (bx - ax) * (cy - by) - (by - ay) * (cx - bx)
            if cross != 0:
                s = 1 if cross > 0 else -1
                if sign == 0:
                    sign = s
                elif s != sign:
                    return False
        return True


@dataclass(frozen=True)
class ObjectSample:
    """Uniform view of one per-frame observation: (object id, x, y, frame)."""

    object_id: str
    frame: int
    x: float
    y: float
    confidence: float


@dataclass(frozen=True)
class TrackSet:
    meta: VideoMeta
    ball: BallTrack
    poses: tuple[PoseFrame, ...]
    scores: tuple[ScoreReading, ...]
    scenes: tuple[SceneLabel, ...]
    court: CourtRegion

    def iter_samples(self):
        for s in self.ball.samples:
            yield ObjectSample("ball", s.frame, s.x, s.y, s.confidence)
        for pf in self.poses:
            for b in pf.boxes:
                yield ObjectSample("player-box", pf.frame, b.cx, b.cy, 1.0)
        for r in self.scores:
            yield ObjectSample("score", r.frame, 0.0, 0.0, r.confidence)
        for lbl in self.scenes:
            yield ObjectSample("scene", lbl.frame, 0.0, 0.0, 1.0)


@dataclass(frozen=True)
class ParseIssue:
    line: int
    code: str
    message: str


@dataclass
class ParseReport:
    issues: list[ParseIssue] = field(default_factory=list)

    def add(self, line: int, code: str, message: str) -> None:
        self.issues.append(ParseIssue(line, code, message))

    def codes(self) -> list[str]:
        return [i.code for i in self.issues]

    @property
    def ok(self) -> bool:
        return not self.issues


@dataclass(frozen=True)
class ValidationIssue:
    code: str
    message: str
    frame: int | None = None


@dataclass
class ValidationReport:
    issues: list[ValidationIssue] = field(default_factory=list)

    def add(self, code: str, message: str, frame: int | None = None) -> None:
        self.issues.append(ValidationIssue(code, message, frame))

    @property
    def ok(self) -> bool:
        return not self.issues


SCENE_PROBABILITY_THRESHOLD = 0.5

_META_KEYS = ("frame_count", "fps", "width", "height")
_COURT_KEYS = ("x0", "y0", "x1", "y1", "x2", "y2", "x3", "y3",
               "net_x", "table_y_min", "table_y_max")


def _fields(tokens: list[str]) -> dict[str, str]:
    out = {}
    for tok in tokens:
        if "=" not in tok:
            raise ValueError(f"token {tok!r} is not key=value")
        k, v = tok.split("=", 1)
        out[k] = v
    return out


def _keypoint(kv: dict[str, str], prefix: str) -> Keypoint | None:
    keys = (f"{prefix}_x", f"{prefix}_y", f"{prefix}_conf")
    if not all(k in kv for k in keys):
        return None
    return Keypoint(float(kv[keys[0]]), float(kv[keys[1]]), float(kv[keys[2]]))


def parse_track_file(data: bytes | str | io.IOBase) -> tuple[TrackSet, ParseReport]:
    """Parse a track file into a TrackSet plus a report of rejected lines.

    Raises MissingHeader if the file has no ``meta`` or no ``court`` record;
    every other defect is collected in the report and the record is skipped.
    """
    if isinstance(data, io.IOBase):
        data = data.read()
    if isinstance(data, bytes):
        text = data.decode("utf-8")
    else:
        text = data

    report = ParseReport()
    lines = text.splitlines()

    meta: VideoMeta | None = None
    court: CourtRegion | None = None

    # Header records may appear anywhere, but bounds checks need them first.
    for lineno, raw in enumerate(lines, start=1):
        tokens = raw.split()
        if not tokens:
            continue
        kind = tokens[0]
        if kind not in ("meta", "court"):
            continue
        try:
            kv = _fields(tokens[1:])
            if kind == "meta":
                if meta is not None:
                    report.add(lineno, "DuplicateHeader", "second meta record ignored")
                    continue
                missing = [k for k in _META_KEYS if k not in kv]
                if missing:
                    raise ValueError(f"meta missing keys {missing}")
                meta = VideoMeta(
                    frame_count=int(kv["frame_count"]),
                    fps=float(kv["fps"]),
                    width=int(kv["width"]),
                    height=int(kv["height"]),
                )
            else:
                if court is not None:
                    report.add(lineno, "DuplicateHeader", "second court record ignored")
                    continue
                missing = [k for k in _COURT_KEYS if k not in kv]
                if missing:
                    raise ValueError(f"court missing keys {missing}")
                quad = tuple(
                    (float(kv[f"x{i}"]), float(kv[f"y{i}"])) for i in range(4)
                )
                court = CourtRegion(
                    quad=quad,
                    net_x=float(kv["net_x"]),
                    table_y_min=float(kv["table_y_min"]),
                    table_y_max=float(kv["table_y_max"]),
                )
        except (ValueError, KeyError) as exc:
            report.add(lineno, "MalformedRecord", f"{kind}: {exc}")

    if meta is None:
        raise MissingHeader("track file has no meta record")
    if court is None:
        raise MissingHeader("track file has no court record")

    balls: list[BallSample] = []
    pose_boxes: dict[int, list[PoseBox]] = {}
    scores: list[ScoreReading] = []
    scenes: list[SceneLabel] = []
    seen = {"ball": set(), "score": set(), "scene": set()}

    for lineno, raw in enumerate(lines, start=1):
        tokens = raw.split()
        if not tokens:
            continue
        kind = tokens[0]
        if kind in ("meta", "court"):
            continue
        if kind not in ("ball", "pose", "score", "scene"):
            report.add(lineno, "UnknownRecordKind", f"unknown record kind {kind!r}")
            continue
        try:
            kv = _fields(tokens[1:])
            frame = int(kv["frame"])
        except (ValueError, KeyError) as exc:
            report.add(lineno, "MalformedRecord", f"{kind}: {exc}")
            continue

        if frame < 0 or frame >= meta.frame_count:
            report.add(lineno, "FrameOutOfRange",
                       f"{kind} frame {frame} outside [0, {meta.frame_count})")
            continue

        try:
            if kind == "ball":
                if frame in seen["ball"]:
                    report.add(lineno, "DuplicateFrame", f"ball frame {frame} repeated")
                    continue
                seen["ball"].add(frame)
                balls.append(BallSample(frame, float(kv["x"]), float(kv["y"]),
                                        float(kv["conf"])))
            elif kind == "pose":
                neck = _keypoint(kv, "neck")
                if neck is None:
                    report.add(lineno, "MissingNeck",
                               f"pose at frame {frame} has no neck keypoint")
                    continue
                box = PoseBox(
                    cx=float(kv["box_cx"]), cy=float(kv["box_cy"]),
                    w=float(kv["box_w"]), h=float(kv["box_h"]),
                    neck=neck,
                    lhand=_keypoint(kv, "lhand"),
                    rhand=_keypoint(kv, "rhand"),
                )
                pose_boxes.setdefault(frame, []).append(box)
            elif kind == "score":
                if frame in seen["score"]:
                    report.add(lineno, "DuplicateFrame", f"score frame {frame} repeated")
                    continue
                seen["score"].add(frame)
                scores.append(ScoreReading(frame, int(kv["a"]), int(kv["b"]),
                                           float(kv["conf"])))
            else:
                if frame in seen["scene"]:
                    report.add(lineno, "DuplicateFrame", f"scene frame {frame} repeated")
                    continue
                seen["scene"].add(frame)
                value = float(kv["in_play"])
                scenes.append(SceneLabel(frame, value >= SCENE_PROBABILITY_THRESHOLD))
        except (ValueError, KeyError) as exc:
            report.add(lineno, "MalformedRecord", f"{kind}: {exc}")

    balls.sort(key=lambda s: s.frame)
    scores.sort(key=lambda r: r.frame)
    scenes.sort(key=lambda s: s.frame)
    poses = tuple(PoseFrame(f, tuple(pose_boxes[f])) for f in sorted(pose_boxes))

    ts = TrackSet(
        meta=meta,
        ball=BallTrack(tuple(balls)),
        poses=poses,
        scores=tuple(scores),
        scenes=tuple(scenes),
        court=court,
    )
    return ts, report


def _num(v: float) -> str:
    # repr round-trips floats exactly; ints stay ints
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def serialize_track_set(ts: TrackSet) -> bytes:
    """Write a TrackSet back to the track-file text format (canonical order)."""
    out: list[str] = []
    m = ts.meta
    out.append(f"meta frame_count={m.frame_count} fps={_num(m.fps)} "
               f"width={m.width} height={m.height}")
    c = ts.court
    quad = " ".join(f"x{i}={_num(p[0])} y{i}={_num(p[1])}"
                    for i, p in enumerate(c.quad))
    out.append(f"court {quad} net_x={_num(c.net_x)} "
               f"table_y_min={_num(c.table_y_min)} table_y_max={_num(c.table_y_max)}")
    for s in ts.ball.samples:
        out.append(f"ball frame={s.frame} x={_num(s.x)} y={_num(s.y)} "
                   f"conf={_num(s.confidence)}")
    for pf in ts.poses:
        for b in pf.boxes:
            parts = [f"pose frame={pf.frame} box_cx={_num(b.cx)} box_cy={_num(b.cy)} "
                     f"box_w={_num(b.w)} box_h={_num(b.h)} "
                     f"neck_x={_num(b.neck.x)} neck_y={_num(b.neck.y)} "
                     f"neck_conf={_num(b.neck.confidence)}"]
            for name, kp in (("lhand", b.lhand), ("rhand", b.rhand)):
                if kp is not None:
                    parts.append(f"{name}_x={_num(kp.x)} {name}_y={_num(kp.y)} "
                                 f"{name}_conf={_num(kp.confidence)}")
            out.append(" ".join(parts))
    for r in ts.scores:
        out.append(f"score frame={r.frame} a={r.score_a} b={r.score_b} "
                   f"conf={_num(r.confidence)}")
    for lbl in ts.scenes:
        out.append(f"scene frame={lbl.frame} in_play={1 if lbl.in_play else 0}")
    return ("\n".join(out) + "\n").encode("utf-8")


DEFAULT_MAX_GAP = 5


def interpolate_ball(track: BallTrack, max_gap: int = DEFAULT_MAX_GAP) -> BallTrack:
    """Fill gaps of at most max_gap missing frames by linear interpolation.

    Interpolated samples are flagged with confidence 0.  Longer gaps stay open
    so that detection failures remain visible downstream.  Existing samples are
    never modified, which also makes the operation idempotent.
    """
    if max_gap < 1:
        raise ValueError("max_gap must be >= 1")
    samples = track.samples
    if len(samples) < 2:
        return track
    out: list[BallSample] = [samples[0]]
    for prev, nxt in zip(samples, samples[1:]):
        gap = nxt.frame - prev.frame - 1
        if 1 <= gap <= max_gap:
            span = nxt.frame - prev.frame
            for f in range(prev.frame + 1, nxt.frame):
                t = (f - prev.frame) / span
                out.append(BallSample(
                    frame=f,
                    x=prev.x + (nxt.x - prev.x) * t,
                    y=prev.y + (nxt.y - prev.y) * t,
                    confidence=0.0,
                ))
        out.append(nxt)
    return BallTrack(tuple(out))


def validate(ts: TrackSet) -> ValidationReport:
    """Check every type-level invariant; an empty report means all hold."""
    rep = ValidationReport()
    n = ts.meta.frame_count

    def check_frame(frame: int, what: str) -> None:
        if frame < 0 or frame >= n:
            rep.add("FrameOutOfRange", f"{what} frame {frame} outside [0, {n})", frame)

    def check_conf(conf: float, what: str, frame: int) -> None:
        if not 0.0 <= conf <= 1.0:
            rep.add("ConfidenceOutOfRange", f"{what} confidence {conf} not in [0, 1]",
                    frame)

    prev_frame = None
    for s in ts.ball.samples:
        check_frame(s.frame, "ball")
        check_conf(s.confidence, "ball", s.frame)
        if prev_frame is not None and s.frame <= prev_frame:
            rep.add("NonIncreasingFrames",
                    f"ball frames not strictly increasing at {s.frame}", s.frame)
        prev_frame = s.frame

    for pf in ts.poses:
        check_frame(pf.frame, "pose")
        for b in pf.boxes:
            check_conf(b.neck.confidence, "pose neck", pf.frame)
            for kp in b.hands():
                check_conf(kp.confidence, "pose hand", pf.frame)

    seen_scores = set()
    for r in ts.scores:
        check_frame(r.frame, "score")
        check_conf(r.confidence, "score", r.frame)
        if r.score_a < 0 or r.score_b < 0:
            rep.add("NegativeScore", f"score ({r.score_a},{r.score_b}) negative",
                    r.frame)
        if r.frame in seen_scores:
            rep.add("DuplicateFrame", f"score frame {r.frame} repeated", r.frame)
        seen_scores.add(r.frame)

    seen_scenes = set()
    for lbl in ts.scenes:
        check_frame(lbl.frame, "scene")
        if lbl.frame in seen_scenes:
            rep.add("DuplicateFrame", f"scene frame {lbl.frame} repeated", lbl.frame)
        seen_scenes.add(lbl.frame)
    if ts.scenes:
        frames = sorted(seen_scenes)
        if frames[-1] - frames[0] + 1 != len(frames):
            rep.add("SceneCoverageGap",
                    "scene labels do not cover a contiguous frame range")

    if not ts.court.is_convex():
        rep.add("NonConvexCourt", "court quadrilateral is not convex")
    if not ts.court.table_y_min < ts.court.table_y_max:
        rep.add("InvalidTableBand",
                f"table y band ({ts.court.table_y_min}, {ts.court.table_y_max}) "
                "is not increasing")
    return rep
