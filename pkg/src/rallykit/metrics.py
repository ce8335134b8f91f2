"""Evaluation metrics: frame error, pixel error, precision/recall.

Detected and true events are matched greedily by nearest frame within a
tolerance, per event type, each event used at most once.  Ties break on the
earlier true frame, then the earlier detected frame, so results are
deterministic and independent of event ids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

DEFAULT_MATCH_GAP = 3


@dataclass(frozen=True)
class MatchedPair:
    truth_frame: int
    detected_frame: int
    truth_xy: tuple[float, float]
    detected_xy: tuple[float, float]


@dataclass(frozen=True)
class Matching:
    pairs: list[MatchedPair]
    unmatched_truth: int
    unmatched_detected: int


@dataclass(frozen=True)
class ErrorStats:
    count: int
    mean: float
    max: float
    unmatched_truth: int
    unmatched_detected: int


def _event_key(e) -> str:
    return e.event_type


def match_events(detected: list, truth: list,
                 gap: int = DEFAULT_MATCH_GAP) -> Matching:
    pairs: list[MatchedPair] = []
    unmatched_truth = 0
    unmatched_detected = 0
    types = sorted({_event_key(e) for e in detected} | {_event_key(e) for e in truth})
    for etype in types:
        det = sorted((e for e in detected if e.event_type == etype),
                     key=lambda e: e.frame)
        tru = sorted((e for e in truth if e.event_type == etype),
                     key=lambda e: e.frame)
        candidates = []
        for i, t in enumerate(tru):
            for j, d in enumerate(det):
                dist = abs(d.frame - t.frame)
                if dist <= gap:
                    candidates.append((dist, t.frame, d.frame, i, j))
        candidates.sort()
        used_t: set[int] = set()
        used_d: set[int] = set()
        for dist, _tf, _df, i, j in candidates:
            if i in used_t or j in used_d:
                continue
            used_t.add(i)
            used_d.add(j)
            t, d = tru[i], det[j]
            pairs.append(MatchedPair(t.frame, d.frame, (t.x, t.y), (d.x, d.y)))
        unmatched_truth += len(tru) - len(used_t)
        unmatched_detected += len(det) - len(used_d)
    return Matching(pairs, unmatched_truth, unmatched_detected)


def _stats(values: list[float], m: Matching) -> ErrorStats:
    if not values:
        return ErrorStats(0, 0.0, 0.0, m.unmatched_truth, m.unmatched_detected)
    return ErrorStats(len(values), sum(values) / len(values), max(values),
                      m.unmatched_truth, m.unmatched_detected)


def temporal_error(detected: list, truth: list,
                   gap: int = DEFAULT_MATCH_GAP) -> ErrorStats:
    """Absolute frame differences of matched events."""
    m = match_events(detected, truth, gap)
    return _stats([abs(p.detected_frame - p.truth_frame) for p in m.pairs], m)


def spatial_error(detected: list, truth: list,
                  gap: int = DEFAULT_MATCH_GAP) -> ErrorStats:
    """Euclidean pixel distances of matched events."""
    m = match_events(detected, truth, gap)
    return _stats([math.hypot(p.detected_xy[0] - p.truth_xy[0],
                              p.detected_xy[1] - p.truth_xy[1])
                   for p in m.pairs], m)


def precision_recall(detected: list, truth: list,
                     gap: int = DEFAULT_MATCH_GAP) -> tuple[float, float]:
    """Correct detections over submitted, and over ground truth.

    With nothing submitted, precision is vacuously 1; with no truth, recall is
    vacuously 1.
    """
    m = match_events(detected, truth, gap)
    matched = len(m.pairs)
    precision = matched / len(detected) if detected else 1.0
    recall = matched / len(truth) if truth else 1.0
    return precision, recall
