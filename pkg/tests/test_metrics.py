from dataclasses import dataclass

import pytest

from rallykit.metrics import match_events, precision_recall, spatial_error, temporal_error


@dataclass(frozen=True)
class Ev:
    event_type: str
    frame: int
    x: float = 0.0
    y: float = 0.0


def test_perfect_detection():
    truth = [Ev("HIT", 10), Ev("BOUNCE", 20), Ev("HIT", 30)]
    assert precision_recall(list(truth), truth) == (1.0, 1.0)
    stats = temporal_error(list(truth), truth)
    assert stats.mean == 0.0 and stats.count == 3


def test_constructed_shift_gives_mean_one():
    truth = [Ev("BOUNCE", f) for f in (10, 30, 50, 70)]
    detected = [Ev("BOUNCE", f + 1) for f in (10, 30)] + \
               [Ev("BOUNCE", f - 1) for f in (50, 70)]
    stats = temporal_error(detected, truth)
    assert stats.mean == pytest.approx(1.0)
    assert stats.unmatched_truth == 0 and stats.unmatched_detected == 0


def test_empty_detections_all_unmatched():
    truth = [Ev("HIT", 10), Ev("HIT", 20)]
    stats = temporal_error([], truth)
    assert stats.count == 0 and stats.unmatched_truth == 2
    p, r = precision_recall([], truth)
    assert p == 1.0 and r == 0.0


def test_two_of_four_found_one_spurious():
    truth = [Ev("BOUNCE", f) for f in (10, 20, 30, 40)]
    detected = [Ev("BOUNCE", 10), Ev("BOUNCE", 21), Ev("BOUNCE", 100)]
    p, r = precision_recall(detected, truth)
    assert p == pytest.approx(2 / 3)
    assert r == pytest.approx(1 / 2)


def test_spatial_three_four_five():
    truth = [Ev("BOUNCE", 10, 0.0, 0.0)]
    detected = [Ev("BOUNCE", 10, 3.0, 4.0)]
    stats = spatial_error(detected, truth)
    assert stats.mean == pytest.approx(5.0)


def test_types_never_cross_match():
    truth = [Ev("HIT", 10)]
    detected = [Ev("BOUNCE", 10)]
    m = match_events(detected, truth)
    assert not m.pairs
    assert m.unmatched_truth == 1 and m.unmatched_detected == 1


def test_matching_respects_gap_and_uniqueness():
    truth = [Ev("HIT", 10), Ev("HIT", 14)]
    detected = [Ev("HIT", 12)]
    m = match_events(detected, truth, gap=3)
    assert len(m.pairs) == 1
    assert m.pairs[0].truth_frame == 10  # tie distance-2, earlier truth wins
    assert m.unmatched_truth == 1


def test_symmetric_under_relabeling():
    truth = [Ev("HIT", 10), Ev("HIT", 20)]
    detected = [Ev("HIT", 20), Ev("HIT", 10)]
    p, r = precision_recall(detected, truth)
    assert (p, r) == (1.0, 1.0)
