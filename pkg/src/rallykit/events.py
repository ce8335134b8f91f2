"""Detect hit and bounce events from ball kinematics and player poses.

A side-view table-tennis rally has two kinematic signatures: the ball's
horizontal velocity reverses when a racket meets it, and its vertical velocity
flips from downward to upward (image coordinates, y down) when it bounces off
the table.  Hits additionally require the ball to pass close to a player's
hand, bounces require the contact point to lie on the table surface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateClusters, UndefinedAtFrame
from .scores import SIDE_A, SIDE_B
from .tracks import BallTrack, CourtRegion, Keypoint, PoseBox, PoseFrame

HIT = "HIT"
BOUNCE = "BOUNCE"

REFERENCE_WIDTH = 1280.0


@dataclass(frozen=True)
class DetectionParams:
    smoothing_window: int = 3          # moving-average width for the ball track
    hit_axis: str = "x"                # velocity component whose sign flip marks a hit
    local_min_window: int = 3          # frames around a flip to search for a distance minimum
    hit_distance_max: float = 120.0    # px at reference width; scale with scaled_for()
    merge_gap: int = 4                 # events of one type closer than this merge
    outlier_sigma: float = 3.0         # cluster-radius multiple beyond which boxes drop
    sigma_floor_frac: float = 0.035    # radius floor as a fraction of court width
    court_gate_factor: float = 1.25    # boxes farther than this * court width from its center drop

    def scaled_for(self, video_width: int) -> "DetectionParams":
        scale = video_width / REFERENCE_WIDTH
        return replace(self, hit_distance_max=self.hit_distance_max * scale)


@dataclass(frozen=True)
class VelocitySeries:
    """Central-difference velocities over a smoothed track.

    Defined exactly on frames where both neighbors exist in the track; the raw
    positions ride along so detectors can report event coordinates.
    """

    values: dict[int, tuple[float, float]]
    positions: dict[int, tuple[float, float]]

    def frames(self) -> list[int]:
        return sorted(self.values)


@dataclass(frozen=True)
class PlayerObs:
    cx: float
    cy: float
    neck: Keypoint
    lhand: Keypoint | None
    rhand: Keypoint | None


@dataclass(frozen=True)
class PlayerTracks:
    by_frame: dict[int, dict[str, PlayerObs]]
    centers: dict[str, tuple[float, float]]


@dataclass(frozen=True)
class DistanceSeries:
    """Per frame and side: pixels from the ball to the nearer hand, falling
    back to the neck when no hand was detected."""

    values: dict[int, dict[str, float]]


@dataclass(frozen=True)
class RawEvent:
    event_type: str
    frame: int
    x: float
    y: float
    side: str | None
    confidence: float


def _runs(frames: list[int]) -> list[list[int]]:
    runs: list[list[int]] = []
    for f in frames:
        if runs and f == runs[-1][-1] + 1:
            runs[-1].append(f)
        else:
            runs.append([f])
    return runs


def velocity(track: BallTrack, smoothing_window: int = 3) -> VelocitySeries:
    """v(t) = (p(t+1) - p(t-1)) / 2 over a moving-average-smoothed track.

    Smoothing uses the full window where available and the raw sample at run
    edges, so straight-line motion keeps an exact constant velocity all the
    way to the first and last defined frame.
    """
    if smoothing_window < 1 or smoothing_window % 2 == 0:
        raise ValueError("smoothing_window must be an odd integer >= 1")
    by_frame = track.by_frame()
    half = smoothing_window // 2

    values: dict[int, tuple[float, float]] = {}
    positions: dict[int, tuple[float, float]] = {}
    for run in _runs(sorted(by_frame)):
        if len(run) < 3:
            continue
        smoothed: dict[int, tuple[float, float]] = {}
        for f in run:
            lo, hi = f - half, f + half
            if lo >= run[0] and hi <= run[-1]:
                xs = [by_frame[g].x for g in range(lo, hi + 1)]
                ys = [by_frame[g].y for g in range(lo, hi + 1)]
                smoothed[f] = (sum(xs) / len(xs), sum(ys) / len(ys))
            else:
                smoothed[f] = (by_frame[f].x, by_frame[f].y)
        for f in run[1:-1]:
            px0, py0 = smoothed[f - 1]
            px1, py1 = smoothed[f + 1]
            values[f] = ((px1 - px0) / 2.0, (py1 - py0) / 2.0)
            positions[f] = (by_frame[f].x, by_frame[f].y)
    return VelocitySeries(values=values, positions=positions)


def assign_players(poses: list[PoseFrame], court: CourtRegion,
                   params: DetectionParams = DetectionParams()) -> PlayerTracks:
    """Cluster pose boxes into the two table sides.

    Box centers are gated to the court neighborhood, clustered with k-means
    (k=2, seeded from the leftmost and rightmost centers so the seeds straddle
    the net), and mapped to sides by mean x against the net line.  Per frame,
    boxes beyond outlier_sigma cluster radii of both centroids are dropped as
    bystanders, then the closest box per side wins.
    """
    if not poses:
        raise DegenerateClusters("no pose frames to cluster")
    x_min, x_max = court.x_range()
    court_w = x_max - x_min
    center_x = (x_min + x_max) / 2.0
    gate = params.court_gate_factor * court_w

    entries: list[tuple[int, PoseBox]] = []
    pts: list[tuple[float, float]] = []
    for pf in poses:
        for box in pf.boxes:
            if abs(box.cx - center_x) > gate:
                continue
            entries.append((pf.frame, box))
            pts.append((box.cx, box.cy))
    if not pts:
        raise DegenerateClusters("no pose boxes near the court")

    arr = np.asarray(pts, dtype=float)
    left_seed = arr[int(np.argmin(arr[:, 0]))]
    right_seed = arr[int(np.argmax(arr[:, 0]))]
    centers = np.stack([left_seed, right_seed])

    assign = np.full(len(arr), -1, dtype=int)
    for _iteration in range(50):
        d2 = ((arr[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        new_assign = np.argmin(d2, axis=1)
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c in range(2):
            member = arr[assign == c]
            if len(member):
                centers[c] = member.mean(axis=0)

    mean_x = centers[:, 0]
    on_left = mean_x < court.net_x
    if on_left[0] == on_left[1]:
        raise DegenerateClusters(
            f"both cluster centers on one side of the net ({mean_x.tolist()})")
    side_of_cluster = {0: SIDE_A if on_left[0] else SIDE_B,
                       1: SIDE_A if on_left[1] else SIDE_B}

    dists = np.sqrt(((arr - centers[assign]) ** 2).sum(axis=1))
    sigma_floor = params.sigma_floor_frac * court_w
    radius = {}
    for c in range(2):
        member = dists[assign == c]
        sigma = float(member.std()) if len(member) else 0.0
        radius[c] = params.outlier_sigma * max(sigma, sigma_floor)

    by_frame: dict[int, dict[str, PlayerObs]] = {}
    for i, (frame, box) in enumerate(entries):
        c = int(assign[i])
        if dists[i] > radius[c]:
            # beyond its own cluster: rescue only if inside the other one
            o = 1 - c
            d_other = math.hypot(box.cx - centers[o][0], box.cy - centers[o][1])
            if d_other > radius[o]:
                continue
            c = o
        side = side_of_cluster[c]
        obs = PlayerObs(box.cx, box.cy, box.neck, box.lhand, box.rhand)
        slot = by_frame.setdefault(frame, {})
        if side in slot:
            prev = slot[side]
            cx, cy = centers[c]
            if math.hypot(box.cx - cx, box.cy - cy) >= math.hypot(prev.cx - cx, prev.cy - cy):
                continue
        slot[side] = obs

    cluster_centers = {side_of_cluster[c]: (float(centers[c][0]), float(centers[c][1]))
                       for c in range(2)}
    return PlayerTracks(by_frame=by_frame, centers=cluster_centers)


def hand_distance(track: BallTrack, players: PlayerTracks) -> DistanceSeries:
    values: dict[int, dict[str, float]] = {}
    for s in track.samples:
        sides = players.by_frame.get(s.frame)
        if not sides:
            continue
        per_side: dict[str, float] = {}
        for side, obs in sides.items():
            hands = [k for k in (obs.lhand, obs.rhand) if k is not None]
            if hands:
                d = min(math.hypot(s.x - k.x, s.y - k.y) for k in hands)
            else:
                d = math.hypot(s.x - obs.neck.x, s.y - obs.neck.y)
            per_side[side] = d
        if per_side:
            values[s.frame] = per_side
    return DistanceSeries(values=values)


def _sign_flips(vel: VelocitySeries, axis: int,
                positive_to_negative_only: bool = False):
    """Yield (candidate_frames, strength) for sign reversals of one component.

    candidate_frames spans from the last frame with the old sign through the
    first frame with the new sign, inclusive; zero-velocity frames in between
    belong to the span.
    """
    for run in _runs(vel.frames()):
        prev_frame: int | None = None
        prev_v: float | None = None
        for f in run:
            v = vel.values[f][axis]
            if v == 0.0:
                continue
            if prev_v is not None and (v > 0) != (prev_v > 0):
                if not positive_to_negative_only or (prev_v > 0 and v < 0):
                    yield list(range(prev_frame, f + 1)), abs(v - prev_v)
            prev_frame, prev_v = f, v


def _merge_events(events: list[RawEvent], gap: int) -> list[RawEvent]:
    """Transitively merge events closer than gap frames, keeping the
    highest-confidence one of each cluster (earliest frame on ties)."""
    if not events:
        return []
    events = sorted(events, key=lambda e: e.frame)
    merged: list[RawEvent] = []
    cluster = [events[0]]
    for e in events[1:]:
        if e.frame - cluster[-1].frame < gap:
            cluster.append(e)
        else:
            merged.append(max(cluster, key=lambda c: (c.confidence, -c.frame)))
            cluster = [e]
    merged.append(max(cluster, key=lambda c: (c.confidence, -c.frame)))
    return merged


def detect_hits(vel: VelocitySeries, dist: DistanceSeries,
                params: DetectionParams = DetectionParams()) -> list[RawEvent]:
    """Racket hits: the hit axis reverses sign and some side's hand distance
    bottoms out nearby at no more than hit_distance_max pixels.

    The reversal gates the event; its reported frame is the distance bottom
    itself, which is where the contact physically happened.
    """
    axis = 0 if params.hit_axis == "x" else 1
    w = params.local_min_window
    events: list[RawEvent] = []
    for span, strength in _sign_flips(vel, axis):
        f = min(span, key=lambda g: abs(vel.values[g][axis]))
        best_side: str | None = None
        best_frame = f
        best_d = math.inf
        for side in (SIDE_A, SIDE_B):
            for g in range(f - w, f + w + 1):
                d_here = dist.values.get(g, {}).get(side)
                if d_here is None or d_here > params.hit_distance_max:
                    continue
                left = dist.values.get(g - 1, {}).get(side, math.inf)
                right = dist.values.get(g + 1, {}).get(side, math.inf)
                if d_here <= left and d_here <= right and d_here < best_d:
                    best_d = d_here
                    best_side = side
                    best_frame = g
        if best_side is None:
            continue
        x, y = vel.positions.get(best_frame) or vel.positions[f]
        events.append(RawEvent(HIT, best_frame, x, y, best_side, strength))
    return _merge_events(events, params.merge_gap)


def detect_bounces(vel: VelocitySeries, track: BallTrack, court: CourtRegion,
                   params: DetectionParams = DetectionParams()) -> list[RawEvent]:
    """Table bounces: vy flips downward-to-upward while the ball sits in the
    table's y band and x range.  The candidate frame is the one closest to the
    surface (largest y) within the reversal span."""
    by_frame = track.by_frame()
    x_min, x_max = court.x_range()
    events: list[RawEvent] = []
    for span, strength in _sign_flips(vel, 1, positive_to_negative_only=True):
        f = max(span, key=lambda g: by_frame[g].y if g in by_frame else -math.inf)
        if f not in by_frame:
            continue
        s = by_frame[f]
        if not (court.table_y_min <= s.y <= court.table_y_max):
            continue
        if not (x_min <= s.x <= x_max):
            continue
        side = SIDE_A if s.x < court.net_x else SIDE_B
        events.append(RawEvent(BOUNCE, f, s.x, s.y, side, strength))
    return _merge_events(events, params.merge_gap)


def estimate_speed(track: BallTrack, frame: int,
                   smoothing_window: int = 3) -> float:
    """Euclidean speed in pixels/frame at one frame of the track."""
    vel = velocity(track, smoothing_window)
    if frame not in vel.values:
        raise UndefinedAtFrame(f"velocity undefined at frame {frame}")
    vx, vy = vel.values[frame]
    return math.hypot(vx, vy)
