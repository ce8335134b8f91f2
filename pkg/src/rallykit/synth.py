"""Synthetic match generator: the ground-truth oracle for the whole pipeline.

Builds a piecewise-ballistic ball trajectory that alternates racket contacts
and table bounces, together with the pose, scoreboard, and scene streams a CV
stack would have produced, plus a GroundTruth record of every true event.
All randomness flows from one seeded generator, so a seed pins the output
byte for byte.

Noise model notes:

* Scoreboard corruption replaces a reading with a random pair; a draw that
  happens to equal the true pair is treated as clean, since it is.
* Scene flips avoid a guard band around true in-play transitions.  A flip on
  a boundary frame would destroy the boundary rather than obscure it -- no
  smoother could recover it, and this classifier failure mode (confident at
  scene changes, flickery mid-scene) is what the downstream vote is for.
* Ball jitter and dropout apply to emitted samples only; the recorded truth
  keeps exact contact frames and positions.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .scores import SIDE_A, SIDE_B, is_game_final, other_side, server_for_point, first_server_of_game
from .tracks import (
    BallSample,
    BallTrack,
    CourtRegion,
    Keypoint,
    PoseBox,
    PoseFrame,
    SceneLabel,
    ScoreReading,
    TrackSet,
    VideoMeta,
)

DEFAULT_COURT = CourtRegion(
    quad=((300.0, 420.0), (980.0, 420.0), (1000.0, 470.0), (280.0, 470.0)),
    net_x=640.0,
    table_y_min=410.0,
    table_y_max=450.0,
)

HIT = "HIT"
BOUNCE = "BOUNCE"


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 0
    games: int = 1
    rallies_per_game: int | None = None   # None: play each game out at random
    strokes_range: tuple[int, int] = (5, 9)
    fps: float = 25.0
    width: int = 1280
    height: int = 720
    ball_jitter: float = 0.0              # sigma, px
    ball_dropout: float = 0.0             # per-sample probability
    ocr_corruption: float = 0.0           # per-reading probability
    scene_flip_rate: float = 0.0          # per-frame probability outside guard bands
    scene_flip_guard: int = 5             # frames around transitions kept clean
    hand_dropout: float = 0.0             # per-frame probability both hands go missing
    distractor_rate: float = 0.0          # per-frame probability of a bystander box
    score_interval: int = 10              # frames between scoreboard readings
    break_range: tuple[int, int] = (80, 140)
    game_break_extra: int = 150
    first_server: str = SIDE_A
    court: CourtRegion = DEFAULT_COURT
    scripted_games: tuple[tuple[tuple[str, int], ...], ...] | None = None

    def __post_init__(self) -> None:
        for name in ("ball_dropout", "ocr_corruption", "scene_flip_rate", "hand_dropout"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")
        if self.ball_jitter < 0:
            raise ValueError("ball_jitter must be >= 0")


@dataclass(frozen=True)
class TrueEvent:
    event_type: str
    frame: int
    x: float
    y: float
    side: str


@dataclass(frozen=True)
class TrueRally:
    rally_id: str
    game_index: int
    frame_start: int
    frame_end: int
    server: str
    winner: str
    strokes: int
    events: tuple[TrueEvent, ...]


@dataclass(frozen=True)
class GroundTruth:
    rallies: tuple[TrueRally, ...]
    score_states: tuple[tuple[int, int, int], ...]  # (frame, a, b)
    game_finals: tuple[tuple[int, int], ...]
    frame_count: int

    def events(self, event_type: str | None = None) -> list[TrueEvent]:
        out = []
        for r in self.rallies:
            for e in r.events:
                if event_type is None or e.event_type == event_type:
                    out.append(e)
        return out

    def qualified(self, server: str | None = None, winner: str | None = None,
                  min_strokes: int | None = None) -> list[str]:
        out = []
        for r in self.rallies:
            if server is not None and r.server != server:
                continue
            if winner is not None and r.winner != winner:
                continue
            if min_strokes is not None and r.strokes < min_strokes:
                continue
            out.append(r.rally_id)
        return out

    def to_json(self) -> str:
        payload = {
            "frame_count": self.frame_count,
            "score_states": [list(s) for s in self.score_states],
            "game_finals": [list(g) for g in self.game_finals],
            "rallies": [
                {
                    "rally_id": r.rally_id,
                    "game_index": r.game_index,
                    "frame_start": r.frame_start,
                    "frame_end": r.frame_end,
                    "server": r.server,
                    "winner": r.winner,
                    "strokes": r.strokes,
                    "events": [
                        {"event_type": e.event_type, "frame": e.frame,
                         "x": e.x, "y": e.y, "side": e.side}
                        for e in r.events
                    ],
                }
                for r in self.rallies
            ],
        }
        return json.dumps(payload, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "GroundTruth":
        d = json.loads(text)
        rallies = tuple(
            TrueRally(
                rally_id=r["rally_id"],
                game_index=r["game_index"],
                frame_start=r["frame_start"],
                frame_end=r["frame_end"],
                server=r["server"],
                winner=r["winner"],
                strokes=r["strokes"],
                events=tuple(TrueEvent(e["event_type"], e["frame"], e["x"], e["y"],
                                       e["side"]) for e in r["events"]),
            )
            for r in d["rallies"]
        )
        return cls(
            rallies=rallies,
            score_states=tuple((s[0], s[1], s[2]) for s in d["score_states"]),
            game_finals=tuple((g[0], g[1]) for g in d["game_finals"]),
            frame_count=d["frame_count"],
        )


GRAVITY = 2.5        # px/frame^2, image y points down
TOSS_FRAMES = 6
TOSS_SPEED = 8.0     # px/frame toward the server before contact
TAIL_FRAMES = 8
SEGMENT_PAD = 4      # scene padding around the ball flight
HAND_INSET = 30.0    # hands sit this far inside the player box, toward the table


def _winner_sequence_for_length(n: int) -> list[str]:
    """A legal game of exactly n rallies (possible for 11..20 and even >= 22)."""
    if 11 <= n <= 20:
        return [SIDE_B] * (n - 11) + [SIDE_A] * 11
    if n >= 22 and n % 2 == 0:
        seq = [SIDE_A, SIDE_B] * 10
        seq += [SIDE_A, SIDE_B] * ((n - 22) // 2)
        seq += [SIDE_A, SIDE_A]
        return seq
    raise ValueError(f"no legal table-tennis game has exactly {n} rallies")


def _scripted_or_random_games(cfg: SynthConfig, rng: np.random.Generator
                              ) -> list[list[tuple[str, int]]]:
    """Per game: list of (winner, strokes) for each rally."""
    lo, hi = cfg.strokes_range

    def strokes() -> int:
        return int(rng.integers(lo, hi + 1))

    if cfg.scripted_games is not None:
        games = [list(g) for g in cfg.scripted_games]
        for g in games:
            a = b = 0
            for winner, _ in g:
                if is_game_final((a, b)):
                    raise ValueError("scripted game continues past a final score")
                if winner == SIDE_A:
                    a += 1
                else:
                    b += 1
            if not is_game_final((a, b)):
                raise ValueError(f"scripted game ends at non-final score ({a},{b})")
        return games

    games = []
    for _ in range(cfg.games):
        if cfg.rallies_per_game is not None:
            winners = _winner_sequence_for_length(cfg.rallies_per_game)
        else:
            winners = []
            a = b = 0
            while not is_game_final((a, b)):
                w = SIDE_A if rng.random() < 0.5 else SIDE_B
                winners.append(w)
                if w == SIDE_A:
                    a += 1
                else:
                    b += 1
        games.append([(w, strokes()) for w in winners])
    return games


@dataclass
class _RallyBuild:
    samples: list[tuple[int, float, float]] = field(default_factory=list)
    events: list[TrueEvent] = field(default_factory=list)
    hand_at: dict[int, tuple[str, float, float]] = field(default_factory=dict)
    last_frame: int = 0
    base_x: dict[str, float] = field(default_factory=dict)
    hand_y: dict[str, float] = field(default_factory=dict)


def _build_rally(start_frame: int, server: str, strokes: int,
                 cfg: SynthConfig, rng: np.random.Generator) -> _RallyBuild:
    court = cfg.court
    x_min, x_max = court.x_range()
    y_surface = (court.table_y_min + court.table_y_max) / 2.0

    base_x = {
        SIDE_A: x_min - 120.0 + float(rng.uniform(-20, 20)),
        SIDE_B: x_max + 120.0 + float(rng.uniform(-20, 20)),
    }
    hand_y = {
        SIDE_A: 330.0 + float(rng.uniform(-10, 10)),
        SIDE_B: 330.0 + float(rng.uniform(-10, 10)),
    }

    def contact(side: str) -> tuple[float, float]:
        inset = HAND_INSET if side == SIDE_A else -HAND_INSET
        return base_x[side] + inset, hand_y[side]

    build = _RallyBuild(base_x=base_x, hand_y=hand_y)
    pts: dict[int, tuple[float, float]] = {}

    # pre-serve drift opposes the outgoing direction so the serve shows a
    # genuine horizontal reversal
    serve_frame = start_frame + TOSS_FRAMES
    sx, sy = contact(server)
    toward = 1.0 if server == SIDE_A else -1.0
    for u in range(TOSS_FRAMES, 0, -1):
        pts[serve_frame - u] = (sx + toward * TOSS_SPEED * u, sy)

    hitter = server
    t_hit = serve_frame
    hit_from = (sx, sy)
    for _k in range(strokes):
        receiver = other_side(hitter)
        hx, hy = hit_from
        build.events.append(TrueEvent(HIT, t_hit, hx, hy, hitter))
        build.hand_at[t_hit] = (hitter, hx, hy)
        pts[t_hit] = (hx, hy)

        if receiver == SIDE_B:
            bx = float(rng.uniform(court.net_x + 40, x_max - 40))
        else:
            bx = float(rng.uniform(x_min + 40, court.net_x - 40))
        t1 = int(rng.integers(7, 11))
        vy1 = (y_surface - hy - 0.5 * GRAVITY * t1 * t1) / t1
        for dt in range(1, t1 + 1):
            x = hx + (bx - hx) * dt / t1
            y = hy + vy1 * dt + 0.5 * GRAVITY * dt * dt
            pts[t_hit + dt] = (x, y)
        t_bounce = t_hit + t1
        pts[t_bounce] = (bx, y_surface)  # junction exact, not fp-accumulated
        build.events.append(TrueEvent(BOUNCE, t_bounce, bx, y_surface,
                                      SIDE_A if bx < court.net_x else SIDE_B))

        rx, ry = contact(receiver)
        t2 = int(rng.integers(6, 10))
        vy2 = (ry - y_surface - 0.5 * GRAVITY * t2 * t2) / t2
        last = t2 if _k < strokes - 1 else TAIL_FRAMES
        for dt in range(1, last + 1):
            x = bx + (rx - bx) * dt / t2
            y = y_surface + vy2 * dt + 0.5 * GRAVITY * dt * dt
            pts[t_bounce + dt] = (x, y)
        if _k < strokes - 1:
            t_hit = t_bounce + t2
            hit_from = (rx, ry)
            hitter = receiver
        else:
            build.last_frame = t_bounce + last

    build.samples = [(f, xy[0], xy[1]) for f, xy in sorted(pts.items())]
    return build


def generate_match(cfg: SynthConfig) -> tuple[TrackSet, GroundTruth]:
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    court = cfg.court
    game_plans = _scripted_or_random_games(cfg, rng)

    rallies: list[TrueRally] = []
    ball_truth: list[tuple[int, float, float]] = []
    pose_frames: dict[int, list[PoseBox]] = {}
    score_flips: list[tuple[int, tuple[int, int]]] = [(0, (0, 0))]
    in_play_spans: list[tuple[int, int]] = []
    game_finals: list[tuple[int, int]] = []

    cursor = 60  # lead-in break
    for g, plan in enumerate(game_plans):
        a = b = 0
        game_first = first_server_of_game(cfg.first_server, g)
        for k, (winner, strokes) in enumerate(plan):
            server = server_for_point(game_first, a + b)
            seg_start = cursor
            flight_start = seg_start + SEGMENT_PAD
            build = _build_rally(flight_start, server, strokes, cfg, rng)
            seg_end = build.last_frame + SEGMENT_PAD
            in_play_spans.append((seg_start, seg_end))
            ball_truth.extend(build.samples)

            base_x = build.base_x
            hand_y = build.hand_y
            for f in range(seg_start, seg_end + 1):
                boxes = []
                for side in (SIDE_A, SIDE_B):
                    cx = base_x[side] + float(rng.normal(0, 3))
                    cy = hand_y[side] + 60 + float(rng.normal(0, 3))
                    neck = Keypoint(base_x[side], hand_y[side] + 5, 0.9)
                    contact = build.hand_at.get(f)
                    if contact is not None and contact[0] == side:
                        hand = Keypoint(contact[1], contact[2], 0.9)
                    else:
                        inset = HAND_INSET if side == SIDE_A else -HAND_INSET
                        hand = Keypoint(base_x[side] + inset + float(rng.normal(0, 4)),
                                        hand_y[side] + float(rng.normal(0, 4)), 0.9)
                    if rng.random() < cfg.hand_dropout and f not in build.hand_at:
                        hand = None
                    boxes.append(PoseBox(cx=cx, cy=cy, w=90.0, h=220.0,
                                         neck=neck, lhand=hand, rhand=None))
                if rng.random() < cfg.distractor_rate:
                    dx = min(cfg.width - 40.0, court.x_range()[1] + 240.0)
                    boxes.append(PoseBox(cx=dx, cy=240.0, w=60.0, h=120.0,
                                         neck=Keypoint(dx, 200.0, 0.8)))
                pose_frames[f] = boxes

            events = tuple(sorted(build.events, key=lambda e: (e.frame, e.event_type)))
            rallies.append(TrueRally(
                rally_id=f"g{g}r{k}",
                game_index=g,
                frame_start=seg_start,
                frame_end=seg_end,
                server=server,
                winner=winner,
                strokes=strokes,
                events=events,
            ))

            if winner == SIDE_A:
                a += 1
            else:
                b += 1
            flip_frame = seg_end + int(rng.integers(25, 41))
            score_flips.append((flip_frame, (a, b)))
            cursor = seg_end + int(rng.integers(cfg.break_range[0],
                                                cfg.break_range[1] + 1))
        game_finals.append((a, b))
        if g < len(game_plans) - 1:
            reset_frame = score_flips[-1][0] + 50
            score_flips.append((reset_frame, (0, 0)))
            cursor += cfg.game_break_extra

    frame_count = cursor + 80

    # scoreboard readings with corruption; record the first clean reading of
    # each true state as its ground-truth frame
    readings: list[ScoreReading] = []
    state_first_clean: dict[int, int] = {}
    flip_idx = 0
    for f in range(0, frame_count, cfg.score_interval):
        while flip_idx + 1 < len(score_flips) and f >= score_flips[flip_idx + 1][0]:
            flip_idx += 1
        true_pair = score_flips[flip_idx][1]
        pair = true_pair
        if rng.random() < cfg.ocr_corruption:
            drawn = (int(rng.integers(0, 14)), int(rng.integers(0, 14)))
            pair = drawn
        conf = float(rng.uniform(0.55, 0.95))
        readings.append(ScoreReading(f, pair[0], pair[1], conf))
        if pair == true_pair and flip_idx not in state_first_clean:
            state_first_clean[flip_idx] = f
    score_states = tuple(
        (state_first_clean.get(i, flip[0]), flip[1][0], flip[1][1])
        for i, flip in enumerate(score_flips)
    )

    # scene labels: flips stay clear of transition guard bands
    transitions: list[int] = []
    for s, e in in_play_spans:
        transitions.append(s)
        transitions.append(e + 1)
    transitions_arr = np.asarray(transitions)
    scenes: list[SceneLabel] = []
    span_idx = 0
    for f in range(frame_count):
        while span_idx < len(in_play_spans) and f > in_play_spans[span_idx][1]:
            span_idx += 1
        truth = (span_idx < len(in_play_spans)
                 and in_play_spans[span_idx][0] <= f <= in_play_spans[span_idx][1])
        label = truth
        if cfg.scene_flip_rate > 0 and rng.random() < cfg.scene_flip_rate:
            if np.abs(transitions_arr - f).min() > cfg.scene_flip_guard:
                label = not truth
        scenes.append(SceneLabel(f, label))

    # ball samples: jitter and dropout on top of the exact trajectory
    samples: list[BallSample] = []
    for f, x, y in ball_truth:
        if cfg.ball_dropout > 0 and rng.random() < cfg.ball_dropout:
            continue
        jx = x + float(rng.normal(0, cfg.ball_jitter)) if cfg.ball_jitter else x
        jy = y + float(rng.normal(0, cfg.ball_jitter)) if cfg.ball_jitter else y
        samples.append(BallSample(f, jx, jy, float(rng.uniform(0.7, 0.99))))

    poses = tuple(PoseFrame(f, tuple(pose_frames[f])) for f in sorted(pose_frames))
    ts = TrackSet(
        meta=VideoMeta(frame_count=frame_count, fps=cfg.fps,
                       width=cfg.width, height=cfg.height),
        ball=BallTrack(tuple(samples)),
        poses=poses,
        scores=tuple(readings),
        scenes=tuple(scenes),
        court=court,
    )
    gt = GroundTruth(
        rallies=tuple(rallies),
        score_states=score_states,
        game_finals=tuple(game_finals),
        frame_count=frame_count,
    )
    return ts, gt
