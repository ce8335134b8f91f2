import random

import pytest
from hypothesis import given, settings, strategies as st

from rallykit.errors import EmptyInput, NoSegments
from rallykit.scenes import InPlaySegment, segments, smooth_labels
from rallykit.scores import (
    GameSpan,
    ScoreState,
    clean_scores,
    detect_games,
    legal_chain_indices,
    rally_boundaries,
    server_for_point,
)
from rallykit.synth import SynthConfig, generate_match
from rallykit.tracks import ScoreReading


def readings(pairs, start_frame=0, step=10, conf=0.9):
    return [ScoreReading(start_frame + i * step, a, b, conf)
            for i, (a, b) in enumerate(pairs)]


# -- brute-force oracle ---------------------------------------------------------

def oracle_legal(p, q):
    if p == q:
        return True
    if q == (p[0] + 1, p[1]) or q == (p[0], p[1] + 1):
        return True
    return q == (0, 0) and max(p) >= 11 and abs(p[0] - p[1]) >= 2


def oracle_best_chain(pairs):
    """Exhaustive search: longest legal chain, lexicographically smallest."""
    n = len(pairs)
    best = (0, ())

    def extend(chain, last):
        nonlocal best
        key = (len(chain), tuple(chain))
        if len(chain) > best[0] or (len(chain) == best[0]
                                    and tuple(chain) < best[1]):
            best = (len(chain), tuple(chain))
        start = chain[-1] + 1 if chain else 0
        for j in range(start, n):
            if last is None or oracle_legal(last, pairs[j]):
                chain.append(j)
                extend(chain, pairs[j])
                chain.pop()

    extend([], None)
    return best


def random_pairs(rng, n):
    pairs = []
    a = b = 0
    for _ in range(n):
        r = rng.random()
        if r < 0.45:
            pairs.append((a, b))
        elif r < 0.7:
            if rng.random() < 0.5:
                a += 1
            else:
                b += 1
            pairs.append((a, b))
        elif r < 0.8 and max(a, b) >= 11 and abs(a - b) >= 2:
            a = b = 0
            pairs.append((a, b))
        else:
            pairs.append((rng.randint(0, 13), rng.randint(0, 13)))
    return pairs


def test_clean_scores_matches_bruteforce():
    rng = random.Random(1234)
    for _ in range(300):
        pairs = random_pairs(rng, rng.randint(1, 12))
        rs = readings(pairs)
        got = legal_chain_indices(rs, 0.5)
        length, chain = oracle_best_chain(pairs)
        assert len(got) == length
        assert tuple(got) == chain
        for i in range(1, len(got)):
            assert oracle_legal(pairs[got[i - 1]], pairs[got[i]])


# -- behaviors -------------------------------------------------------------------

def test_already_clean_sequence_passes_through():
    states = clean_scores(readings([(0, 0), (1, 0), (1, 1)],
                                   start_frame=10, step=445))
    assert [(s.frame, s.score_a, s.score_b) for s in states] == \
        [(10, 0, 0), (455, 1, 0), (900, 1, 1)]


def test_runs_collapse_to_first_frame():
    states = clean_scores(readings([(0, 0), (0, 0), (0, 0), (1, 0), (1, 0)]))
    assert [(s.frame, s.pair) for s in states] == [(0, (0, 0)), (30, (1, 0))]


def test_low_confidence_filtered_and_empty_raises():
    rs = [ScoreReading(0, 0, 0, 0.2), ScoreReading(10, 5, 5, 0.9)]
    states = clean_scores(rs, min_conf=0.5)
    assert [(s.score_a, s.score_b) for s in states] == [(5, 5)]
    with pytest.raises(EmptyInput):
        clean_scores([ScoreReading(0, 0, 0, 0.2)], min_conf=0.5)


def test_noise_recovery_equals_truth_change_points():
    ts, gt = generate_match(SynthConfig(seed=21, games=2, ocr_corruption=0.10))
    states = clean_scores(list(ts.scores))
    assert [(s.frame, s.score_a, s.score_b) for s in states] == \
        [tuple(t) for t in gt.score_states]


legal_sequences = st.integers(0, 2**32 - 1).map(
    lambda seed: _legal_sequence(seed))


def _legal_sequence(seed):
    rng = random.Random(seed)
    pairs = [(0, 0)]
    for _ in range(rng.randint(0, 25)):
        a, b = pairs[-1]
        r = rng.random()
        if r < 0.4:
            pairs.append((a, b))
        elif max(a, b) >= 11 and abs(a - b) >= 2 and r < 0.5:
            pairs.append((0, 0))
        elif rng.random() < 0.5:
            pairs.append((a + 1, b))
        else:
            pairs.append((a, b + 1))
    return pairs


@settings(max_examples=60)
@given(legal_sequences)
def test_identity_on_legal_sequences(pairs):
    rs = readings(pairs)
    chain = legal_chain_indices(rs, 0.5)
    assert chain == list(range(len(pairs)))
    states = clean_scores(rs)
    collapsed = []
    for i, p in enumerate(pairs):
        if not collapsed or collapsed[-1][1] != p:
            collapsed.append((i * 10, p))
    assert [(s.frame, s.pair) for s in states] == collapsed


@settings(max_examples=40)
@given(legal_sequences, st.integers(0, 2**31))
def test_appending_noise_bounds_chain_growth(pairs, noise_seed):
    rng = random.Random(noise_seed)
    noise = [(rng.randint(0, 13), rng.randint(0, 13))
             for _ in range(rng.randint(1, 6))]
    base = len(legal_chain_indices(readings(pairs), 0.5))
    grown = len(legal_chain_indices(readings(pairs + noise), 0.5))
    assert grown <= base + len(noise)


def test_output_nondecreasing_within_each_game():
    rng = random.Random(99)
    for _ in range(50):
        pairs = random_pairs(rng, 12)
        try:
            states = clean_scores(readings(pairs))
        except EmptyInput:
            continue
        for p, q in zip(states, states[1:]):
            decreased = q.score_a <= p.score_a and q.score_b <= p.score_b \
                and q.pair != p.pair
            if not decreased:  # same game: componentwise non-decreasing
                assert q.score_a >= p.score_a and q.score_b >= p.score_b


def test_detect_games_single_reset():
    states = [ScoreState(0, 0, 0), ScoreState(100, 11, 7),
              ScoreState(200, 0, 0), ScoreState(300, 11, 9)]
    spans = detect_games(states)
    assert [(g.final_a, g.final_b) for g in spans] == [(11, 7), (11, 9)]
    assert [g.index for g in spans] == [0, 1]


def test_detect_games_no_reset():
    states = [ScoreState(0, 0, 0), ScoreState(50, 1, 0), ScoreState(90, 1, 1)]
    spans = detect_games(states)
    assert spans == [GameSpan(0, 0, 90, 1, 1)]


def test_detect_games_partition_states():
    ts, gt = generate_match(SynthConfig(seed=31, games=4, ocr_corruption=0.08))
    states = clean_scores(list(ts.scores))
    spans = detect_games(states)
    assert len(spans) == 4
    assert [(g.final_a, g.final_b) for g in spans] == list(gt.game_finals)
    covered = []
    for g in spans:
        covered += [s for s in states
                    if g.frame_start <= s.frame <= g.frame_end]
    assert covered == states


def test_rally_single_pairing():
    states = [ScoreState(10, 0, 0), ScoreState(450, 1, 0)]
    rallies = rally_boundaries(states, [InPlaySegment(100, 400)])
    assert len(rallies) == 1
    r = rallies[0]
    assert (r.frame_start, r.frame_end, r.winner, r.flagged) == (100, 400, "A", False)


def test_rally_two_changes_paired_in_order():
    states = [ScoreState(0, 0, 0), ScoreState(500, 1, 0), ScoreState(1000, 1, 1)]
    segs = [InPlaySegment(100, 400), InPlaySegment(600, 900)]
    rallies = rally_boundaries(states, segs)
    assert [(r.frame_start, r.winner) for r in rallies] == [(100, "A"), (600, "B")]
    assert [r.rally_id for r in rallies] == ["g0r0", "g0r1"]


def test_rally_unmatched_segment_flagged():
    states = [ScoreState(0, 0, 0), ScoreState(500, 1, 0)]
    segs = [InPlaySegment(100, 400), InPlaySegment(600, 900)]
    rallies = rally_boundaries(states, segs)
    assert len(rallies) == 2
    assert rallies[1].flagged and rallies[1].winner is None


def test_rally_requires_segments():
    with pytest.raises(NoSegments):
        rally_boundaries([ScoreState(0, 0, 0)], [])


def test_server_rotation():
    # swap every two points, then every point from 10-10
    assert [server_for_point("A", n) for n in range(8)] == \
        ["A", "A", "B", "B", "A", "A", "B", "B"]
    assert [server_for_point("A", n) for n in (20, 21, 22)] == ["A", "B", "A"]


def test_winner_score_increments_by_one():
    ts, gt = generate_match(SynthConfig(seed=8, games=2))
    states = clean_scores(list(ts.scores))
    segs = segments(smooth_labels(list(ts.scenes)))
    rallies = rally_boundaries(states, segs)
    ordered = sorted(states, key=lambda s: s.frame)
    for r in rallies:
        assert r.winner in ("A", "B")
        after = [s for s in ordered if s.frame > r.frame_end]
        before = [s for s in ordered if s.frame <= r.frame_end]
        p, q = before[-1], after[0]
        if r.winner == "A":
            assert (q.score_a, q.score_b) == (p.score_a + 1, p.score_b)
        else:
            assert (q.score_a, q.score_b) == (p.score_a, p.score_b + 1)
