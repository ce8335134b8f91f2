"""Acceptance criteria, one test per criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the verdicts.
"""

import random
import subprocess
import sys
import time

from rallykit.metrics import precision_recall, temporal_error
from rallykit.pipeline import MatchRepository, PipelineConfig, detect_match
from rallykit.scenes import segments, smooth_labels
from rallykit.scores import clean_scores, legal_chain_indices, rally_boundaries, server_for_point
from rallykit.store import HIT, MatchStore, MutationRecord, QueryRule
from rallykit.synth import BOUNCE, SynthConfig, generate_match
from rallykit.synth import HIT as TRUE_HIT
from rallykit.tracks import ScoreReading, serialize_track_set

from test_scores import oracle_best_chain, oracle_legal, random_pairs
from test_store import make_store, random_mutations, states_equal


def _verdict(name: str, ok: bool, detail: str = "") -> None:
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


def _detect_all(ts, gt, config=PipelineConfig()):
    """Detected HIT/BOUNCE anchors for a generated match, via the pipeline."""
    _, _, rallies, anchors, _, warnings = detect_match(
        serialize_track_set(ts), config)
    events = [a for a in anchors if a.event_type in (TRUE_HIT, BOUNCE)]

    class Ev:
        def __init__(self, a):
            self.event_type = a.event_type
            self.frame = a.frame_start
            self.x = a.x
            self.y = a.y

    return rallies, [Ev(a) for a in events], warnings


def test_lis_equivalence_and_speed():
    """clean_scores equals the brute-force subsequence oracle on 1,000 random
    sequences of length <= 15; 100,000 readings clean in under a second."""
    rng = random.Random(20260810)
    for _ in range(1000):
        pairs = random_pairs(rng, rng.randint(1, 15))
        readings = [ScoreReading(i * 10, a, b, 0.9)
                    for i, (a, b) in enumerate(pairs)]
        got = legal_chain_indices(readings, 0.5)
        length, chain = oracle_best_chain(pairs)
        assert len(got) == length, (pairs, got, chain)
        assert tuple(got) == chain, (pairs, got, chain)
        for i in range(1, len(got)):
            assert oracle_legal(pairs[got[i - 1]], pairs[got[i]])

    big = []
    a = b = 0
    perf_rng = random.Random(1)
    for i in range(100000):
        if perf_rng.random() < 0.02:
            if max(a, b) >= 11 and abs(a - b) >= 2:
                a = b = 0
            elif perf_rng.random() < 0.5:
                a += 1
            else:
                b += 1
        if perf_rng.random() < 0.1:
            big.append(ScoreReading(i * 10, perf_rng.randint(0, 13),
                                    perf_rng.randint(0, 13), 0.9))
        else:
            big.append(ScoreReading(i * 10, a, b, 0.9))
    t0 = time.perf_counter()
    clean_scores(big)
    elapsed = time.perf_counter() - t0
    _verdict("LIS equivalence + speed", elapsed < 1.0,
             f"1000/1000 sequences match oracle; 100k readings in {elapsed:.3f}s")


def test_rally_segmentation_robustness():
    """>= 98% of rallies recover boundaries and winner exactly across 50
    seeded matches with 10% OCR corruption and 5% scene-label flips."""
    total = exact = 0
    for seed in range(50):
        cfg = SynthConfig(seed=seed, games=1, ocr_corruption=0.10,
                          scene_flip_rate=0.05)
        ts, gt = generate_match(cfg)
        states = clean_scores(list(ts.scores))
        segs = segments(smooth_labels(list(ts.scenes)))
        rallies = rally_boundaries(states, segs)
        truth = {(r.frame_start, r.frame_end): r for r in gt.rallies}
        total += len(gt.rallies)
        for r in rallies:
            t = truth.get((r.frame_start, r.frame_end))
            if t is not None and r.winner == t.winner:
                exact += 1
    rate = exact / total
    _verdict("Rally segmentation robustness", rate >= 0.98,
             f"{exact}/{total} rallies exact = {rate:.4f} (>= 0.98)")


def test_event_detection_zero_noise():
    """Precision = recall = 1.0 and |frame error| <= 1 on clean rallies with
    5 to 9 bounces each."""
    worst = 0.0
    for seed in (0, 1, 2):
        ts, gt = generate_match(SynthConfig(seed=seed, games=1,
                                            strokes_range=(5, 9)))
        for r in gt.rallies:
            assert 5 <= sum(1 for e in r.events if e.event_type == BOUNCE) <= 9
        _, detected, warnings = _detect_all(ts, gt)
        assert not warnings
        truth = gt.events()
        p, rec = precision_recall(detected, truth, gap=3)
        stats = temporal_error(detected, truth, gap=3)
        assert (p, rec) == (1.0, 1.0), (seed, p, rec)
        worst = max(worst, stats.max)
    _verdict("Event detection at zero noise", worst <= 1.0,
             f"precision=recall=1.0, max |frame error| = {worst:.1f} (<= 1)")


def test_event_detection_under_noise():
    """At 1 px jitter and 5% dropout: precision >= 0.95, recall >= 0.95,
    mean temporal error <= 1 frame over 20 seeds."""
    tp = fp = fn = 0
    err_sum = 0.0
    for seed in range(20):
        cfg = SynthConfig(seed=seed, games=1, ball_jitter=1.0, ball_dropout=0.05)
        ts, gt = generate_match(cfg)
        _, detected, _ = _detect_all(ts, gt)
        truth = gt.events()
        stats = temporal_error(detected, truth, gap=3)
        tp += stats.count
        fn += stats.unmatched_truth
        fp += stats.unmatched_detected
        err_sum += stats.mean * stats.count
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    mean_err = err_sum / tp
    ok = precision >= 0.95 and recall >= 0.95 and mean_err <= 1.0
    _verdict("Event detection under noise", ok,
             f"precision={precision:.4f} recall={recall:.4f} "
             f"mean_error={mean_err:.3f} over 20 seeds")


def test_serve_and_attack_query():
    """A 24-rally game built with exactly 2 qualified rallies; the query
    returns exactly those 2; adding predicates is monotone over 200 pairs."""
    servers = [server_for_point("A", k) for k in range(24)]
    winners = ["A" if k % 2 == 0 else "B" for k in range(22)] + ["A", "A"]
    target = {k for k, (s, w) in enumerate(zip(servers, winners))
              if s == "A" and w == "A"}
    chosen = sorted(target)[1:3]  # exactly two get enough strokes
    script = tuple(
        (winners[k], 5 if k in chosen else (2 if k in target else 4))
        for k in range(24))
    cfg = SynthConfig(seed=6, scripted_games=(script,))
    ts, gt = generate_match(cfg)
    expected = gt.qualified(server="A", winner="A", min_strokes=3)
    assert len(expected) == 2

    track = serialize_track_set(ts)
    import tempfile
    with tempfile.TemporaryDirectory() as d:
        repo = MatchRepository(d)
        mid = repo.run_pipeline(track)
        store = repo.store(mid)
        got = [r.rally_id for r in store.query_rallies(
            QueryRule(server="A", winner="A", min_strokes=3))]
        assert got == [f"{mid}:{rid}" for rid in expected], (got, expected)

        rng = random.Random(8)
        sides = ("A", "B")
        vocab_items = [(c, v) for c, vals in store.vocabulary.items()
                       for v in vals]
        checked = 0
        for _ in range(200):
            base = QueryRule(server=rng.choice(sides),
                             min_strokes=rng.randint(0, 4))
            extras = {}
            kind = rng.random()
            if kind < 0.4:
                extras["winner"] = rng.choice(sides)
            elif kind < 0.7:
                extras["min_strokes"] = base.min_strokes + rng.randint(1, 3)
            else:
                extras["predicates"] = (rng.choice(vocab_items),)
            narrowed = QueryRule(server=base.server,
                                 winner=extras.get("winner"),
                                 min_strokes=extras.get("min_strokes",
                                                        base.min_strokes),
                                 predicates=extras.get("predicates", ()))
            wide = {r.rally_id for r in store.query_rallies(base)}
            narrow = {r.rally_id for r in store.query_rallies(narrowed)}
            assert narrow <= wide
            checked += 1
    _verdict("Serve-and-attack query", True,
             f"exactly 2 of 24 rallies returned; monotone over {checked} rule pairs")


def test_store_equivalence():
    """1,000 random valid mutation sequences: replay(log) equals live state
    field by field; export -> import -> export is byte-identical."""
    rng = random.Random(55)
    for trial in range(1000):
        live = make_store()
        random_mutations(live, rng, rng.randint(1, 12))
        lines = [rec.to_line() for rec in live.log]
        replayed = make_store().replay(
            [MutationRecord.from_line(line) for line in lines])
        assert states_equal(live, replayed), f"trial {trial}"

        if trial % 50 == 0:
            for fmt in (MatchStore.ANCHORS, MatchStore.ANNOTATIONS):
                data = live.export(fmt)
                other = make_store()
                if fmt == MatchStore.ANCHORS:
                    other.import_anchors(data)
                else:
                    other.import_annotations(data)
                assert other.export(fmt) == data
    _verdict("Store equivalence", True,
             "1000/1000 replays equal live state; export round trips byte-identical")


def test_pipeline_idempotence_and_determinism():
    """Same fixture twice -> identical store state; same seed -> byte-identical
    synthetic output."""
    cfg = SynthConfig(seed=33, games=1, ball_jitter=0.5, ocr_corruption=0.05)
    ts1, gt1 = generate_match(cfg)
    ts2, gt2 = generate_match(cfg)
    bytes1, bytes2 = serialize_track_set(ts1), serialize_track_set(ts2)
    assert bytes1 == bytes2
    assert gt1.to_json() == gt2.to_json()

    import tempfile
    with tempfile.TemporaryDirectory() as d:
        repo = MatchRepository(d)
        mid1 = repo.run_pipeline(bytes1)
        st1 = repo.store(mid1)
        snap1 = (st1.export(MatchStore.ANCHORS), sorted(st1.rallies))
        mid2 = repo.run_pipeline(bytes1)
        st2 = repo.store(mid2)
        snap2 = (st2.export(MatchStore.ANCHORS), sorted(st2.rallies))
        assert mid1 == mid2
        assert snap1 == snap2
        assert st2.log == []
    _verdict("Pipeline idempotence + determinism", True,
             "same match id, identical anchors, byte-identical synth")


def test_cli_only_drive(tmp_path):
    """The whole primary flow runs through the CLI with no frontend: synth,
    ingest, detect, export, eval."""
    def run(*args):
        proc = subprocess.run([sys.executable, "-m", "rallykit", *args],
                              capture_output=True, text=True, timeout=300)
        assert proc.returncode == 0, proc.stderr
        return proc.stdout

    track = tmp_path / "match.rktk"
    gt = tmp_path / "gt.json"
    store_dir = tmp_path / "store"
    run("synth", "--out", str(track), "--ground-truth", str(gt), "--seed", "19")
    run("ingest", "--track", str(track))
    out = run("detect", "--track", str(track), "--store-dir", str(store_dir))
    match_id = out.split("match_id=")[1].split()[0]
    export_path = tmp_path / "anchors.txt"
    run("export", "--store-dir", str(store_dir), "--match", match_id,
        "--format", "anchors", "--out", str(export_path))
    assert export_path.read_bytes()
    report = run("eval", "--store-dir", str(store_dir), "--match", match_id,
                 "--ground-truth", str(gt))
    values = dict(line.split("=", 1) for line in report.strip().splitlines())
    assert float(values["events.precision"]) == 1.0
    assert float(values["events.recall"]) == 1.0
    assert float(values["rally.accuracy"]) == 1.0
    _verdict("CLI-only drive", True,
             "synth -> ingest -> detect -> export -> eval all green via CLI")
