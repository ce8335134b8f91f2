"""Recover clean score history and match structure from noisy scoreboard reads.

The scoreboard OCR stream is full of junk: misread digits, stale overlays,
frames with no board at all.  The cleaner keeps the longest subsequence of
readings that a real table-tennis match could have produced: the score pair
either stays put, one side gains exactly one point, or the board resets to
0-0 after a finished game.  Everything else is noise and gets dropped.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import EmptyInput, NoSegments
from .scenes import InPlaySegment
from .tracks import ScoreReading

SIDE_A = "A"
SIDE_B = "B"

GAME_POINT = 11
DEFAULT_MIN_CONF = 0.5


@dataclass(frozen=True)
class ScoreState:
    """A score pair and the first frame at which it was observed."""

    frame: int
    score_a: int
    score_b: int

    @property
    def pair(self) -> tuple[int, int]:
        return (self.score_a, self.score_b)


@dataclass(frozen=True)
class GameSpan:
    index: int
    frame_start: int
    frame_end: int
    final_a: int
    final_b: int


@dataclass(frozen=True)
class RallySpan:
    rally_id: str
    game_index: int
    frame_start: int
    frame_end: int
    server: str
    winner: str | None
    flagged: bool = False


def other_side(side: str) -> str:
    return SIDE_B if side == SIDE_A else SIDE_A


def is_game_final(pair: tuple[int, int]) -> bool:
    a, b = pair
    return max(a, b) >= GAME_POINT and abs(a - b) >= 2


def legal_step(p: tuple[int, int], q: tuple[int, int]) -> bool:
    """Whether q may directly follow p on a real scoreboard.

    Same pair (board unchanged), a single point to one side, or a reset to
    0-0 once p is a finished-game score.
    """
    if p == q:
        return True
    if q == (p[0] + 1, p[1]) or q == (p[0], p[1] + 1):
        return True
    return q == (0, 0) and is_game_final(p)


def legal_chain_indices(readings: list[ScoreReading],
                        min_conf: float = DEFAULT_MIN_CONF) -> list[int]:
    """Indices of the longest legal subsequence of confident readings.

    Ties in length are broken toward the lexicographically smallest frame
    sequence.  Runs in O(n): a backward pass computes, per reading, the length
    of the best chain starting there (transitions only relate a pair to
    itself, its two single-point successors, or 0-0, so a dict keyed by pair
    value carries the suffix maxima); a forward greedy walk then picks the
    earliest reading able to head a maximal chain and repeatedly the earliest
    legal successor that can still complete it.
    """
    kept = [i for i, r in enumerate(readings) if r.confidence >= min_conf]
    if not kept:
        raise EmptyInput("no readings at or above the confidence threshold")

    n = len(kept)
    pairs = [(readings[i].score_a, readings[i].score_b) for i in kept]

    f = [0] * n  # longest legal chain starting at position k
    best_future: dict[tuple[int, int], int] = {}
    for k in range(n - 1, -1, -1):
        a, b = pairs[k]
        best = best_future.get((a, b), 0)
        nxt = best_future.get((a + 1, b), 0)
        if nxt > best:
            best = nxt
        nxt = best_future.get((a, b + 1), 0)
        if nxt > best:
            best = nxt
        if is_game_final((a, b)):
            nxt = best_future.get((0, 0), 0)
            if nxt > best:
                best = nxt
        f[k] = 1 + best
        if f[k] > best_future.get((a, b), 0):
            best_future[(a, b)] = f[k]

    total = max(f)
    chain: list[int] = []
    remaining = total
    pos = 0
    prev_pair: tuple[int, int] | None = None
    while remaining > 0:
        while True:
            if f[pos] >= remaining and (
                prev_pair is None or legal_step(prev_pair, pairs[pos])
            ):
                break
            pos += 1
        chain.append(kept[pos])
        prev_pair = pairs[pos]
        remaining -= 1
        pos += 1
    return chain


def clean_scores(readings: list[ScoreReading],
                 min_conf: float = DEFAULT_MIN_CONF) -> list[ScoreState]:
    """Longest legal score history; runs of an unchanged pair collapse to the
    first frame of the run."""
    chain = legal_chain_indices(readings, min_conf)
    states: list[ScoreState] = []
    prev: tuple[int, int] | None = None
    for idx in chain:
        r = readings[idx]
        pair = (r.score_a, r.score_b)
        if pair != prev:
            states.append(ScoreState(r.frame, r.score_a, r.score_b))
            prev = pair
    return states


def detect_games(states: list[ScoreState]) -> list[GameSpan]:
    """Split the state sequence into games at componentwise score decreases."""
    if not states:
        return []
    spans: list[GameSpan] = []
    start = 0
    for i in range(1, len(states)):
        p, q = states[i - 1], states[i]
        decreases = (q.score_a <= p.score_a and q.score_b <= p.score_b
                     and q.pair != p.pair)
        if decreases:
            spans.append(GameSpan(
                index=len(spans),
                frame_start=states[start].frame,
                frame_end=states[i - 1].frame,
                final_a=states[i - 1].score_a,
                final_b=states[i - 1].score_b,
            ))
            start = i
    spans.append(GameSpan(
        index=len(spans),
        frame_start=states[start].frame,
        frame_end=states[-1].frame,
        final_a=states[-1].score_a,
        final_b=states[-1].score_b,
    ))
    return spans


def server_for_point(first_server: str, points_played: int) -> str:
    """Table-tennis service rotation: swap every two points, every point
    once both players have reached 10."""
    if points_played < 20:
        turn = points_played // 2
    else:
        turn = 10 + (points_played - 20)
    return first_server if turn % 2 == 0 else other_side(first_server)


def first_server_of_game(match_first_server: str, game_index: int) -> str:
    return match_first_server if game_index % 2 == 0 else other_side(match_first_server)


def rally_boundaries(states: list[ScoreState],
                     segments: list[InPlaySegment],
                     first_server: str = SIDE_A) -> list[RallySpan]:
    """Pair score changes with in-play segments to produce rally spans.

    Each score change claims the latest unused segment that ended before the
    change frame; the incremented side is the winner.  Segments no change
    claims (lets, replays, broadcast filler) are kept but flagged with an
    unknown winner so annotators can still reach that footage.
    """
    if not segments:
        raise NoSegments("no in-play segments to pair with score changes")
    segs = sorted(segments, key=lambda s: s.frame_start)
    games = detect_games(states)

    # per-state game index, in state order
    state_games: list[int] = []
    gi = 0
    for st in states:
        while gi + 1 < len(games) and st.frame >= games[gi + 1].frame_start:
            gi += 1
        state_games.append(gi)

    used = [False] * len(segs)
    paired: list[tuple[InPlaySegment, int, str, str]] = []  # seg, game, server, winner

    for i in range(1, len(states)):
        p, q = states[i - 1], states[i]
        if state_games[i] != state_games[i - 1]:
            continue  # game reset, not a rally outcome
        da, db = q.score_a - p.score_a, q.score_b - p.score_b
        if (da, db) == (1, 0):
            winner = SIDE_A
        elif (da, db) == (0, 1):
            winner = SIDE_B
        else:
            continue
        game = state_games[i]
        candidate = None
        for k in range(len(segs) - 1, -1, -1):
            if not used[k] and segs[k].frame_end < q.frame:
                candidate = k
                break
        if candidate is None:
            continue  # change has no preceding footage; nothing to anchor
        used[candidate] = True
        points_before = p.score_a + p.score_b
        server = server_for_point(first_server_of_game(first_server, game),
                                  points_before)
        paired.append((segs[candidate], game, server, winner))

    rallies: list[tuple[InPlaySegment, int, str, str | None, bool]] = [
        (seg, game, server, winner, False) for seg, game, server, winner in paired
    ]

    for k, seg in enumerate(segs):
        if used[k]:
            continue
        game = 0
        for g in games:
            if seg.frame_start >= g.frame_start:
                game = g.index
        # score in effect when the segment began drives the rotation
        points_before = 0
        for i, st in enumerate(states):
            if st.frame <= seg.frame_start and state_games[i] == game:
                points_before = st.score_a + st.score_b
        server = server_for_point(first_server_of_game(first_server, game),
                                  points_before)
        rallies.append((seg, game, server, None, True))

    rallies.sort(key=lambda r: r[0].frame_start)
    out: list[RallySpan] = []
    counters: dict[int, int] = {}
    for seg, game, server, winner, flagged in rallies:
        k = counters.get(game, 0)
        counters[game] = k + 1
        out.append(RallySpan(
            rally_id=f"g{game}r{k}",
            game_index=game,
            frame_start=seg.frame_start,
            frame_end=seg.frame_end,
            server=server,
            winner=winner,
            flagged=flagged,
        ))
    return out
