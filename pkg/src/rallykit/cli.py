"""Command-line interface: ingest, detect, serve, export, eval, synth.

Configuration comes from one JSON file (--config) with flag overrides; see
PipelineConfig and DetectionParams for the accepted keys.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import metrics
from .pipeline import MatchRepository, PipelineConfig
from .store import MatchStore
from .synth import GroundTruth, SynthConfig, generate_match
from .tracks import parse_track_file, serialize_track_set, validate


def _load_config(args) -> PipelineConfig:
    cfg = PipelineConfig.from_file(args.config) if args.config else PipelineConfig()
    overrides = {}
    for name in ("min_conf", "scene_window", "min_segment_len", "max_gap",
                 "first_server", "slowdown_lead", "slowdown_rate", "metrics_gap",
                 "hit_distance_max", "merge_gap"):
        v = getattr(args, name, None)
        if v is not None:
            overrides[name] = v
    return cfg.with_overrides(**overrides)


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--min-conf", dest="min_conf", type=float)
    p.add_argument("--scene-window", dest="scene_window", type=int)
    p.add_argument("--min-segment-len", dest="min_segment_len", type=int)
    p.add_argument("--max-gap", dest="max_gap", type=int)
    p.add_argument("--first-server", dest="first_server", choices=("A", "B"))
    p.add_argument("--slowdown-lead", dest="slowdown_lead", type=int)
    p.add_argument("--slowdown-rate", dest="slowdown_rate", type=float)
    p.add_argument("--metrics-gap", dest="metrics_gap", type=int)
    p.add_argument("--hit-distance-max", dest="hit_distance_max", type=float)
    p.add_argument("--merge-gap", dest="merge_gap", type=int)


def cmd_ingest(args) -> int:
    data = Path(args.track).read_bytes()
    ts, report = parse_track_file(data)
    vrep = validate(ts)
    print(f"frames={ts.meta.frame_count} fps={ts.meta.fps} "
          f"size={ts.meta.width}x{ts.meta.height}")
    print(f"ball_samples={len(ts.ball.samples)} pose_frames={len(ts.poses)} "
          f"score_readings={len(ts.scores)} scene_labels={len(ts.scenes)}")
    for issue in report.issues:
        print(f"parse line={issue.line} code={issue.code} {issue.message}")
    for issue in vrep.issues:
        where = "" if issue.frame is None else f" frame={issue.frame}"
        print(f"invalid code={issue.code}{where} {issue.message}")
    print(f"parse_issues={len(report.issues)} invariant_violations={len(vrep.issues)}")
    return 0 if vrep.ok else 1


def cmd_detect(args) -> int:
    config = _load_config(args)
    repo = MatchRepository(args.store_dir)
    data = Path(args.track).read_bytes()
    match_id = repo.run_pipeline(data, config, video_url=args.video_url)
    store = repo.store(match_id)
    anchors = store.list_anchors()
    by_type: dict[str, int] = {}
    for a in anchors:
        by_type[a.event_type] = by_type.get(a.event_type, 0) + 1
    counts = " ".join(f"anchors.{k}={v}" for k, v in sorted(by_type.items()))
    print(f"match_id={match_id} rallies={len(store.list_rallies())} {counts}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .api import create_app

    config = _load_config(args)
    repo = MatchRepository(args.store_dir)
    app = create_app(repo, config)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_export(args) -> int:
    repo = MatchRepository(args.store_dir)
    store = repo.store(args.match)
    fmt = MatchStore.ANCHORS if args.format == "anchors" else MatchStore.ANNOTATIONS
    data = store.export(fmt)
    if args.out:
        Path(args.out).write_bytes(data)
        print(f"wrote {len(data)} bytes to {args.out}")
    else:
        sys.stdout.write(data.decode("utf-8"))
    return 0


def cmd_synth(args) -> int:
    cfg = SynthConfig(
        seed=args.seed,
        games=args.games,
        rallies_per_game=args.rallies_per_game,
        ball_jitter=args.ball_jitter,
        ball_dropout=args.ball_dropout,
        ocr_corruption=args.ocr_corruption,
        scene_flip_rate=args.scene_flip_rate,
        hand_dropout=args.hand_dropout,
        distractor_rate=args.distractor_rate,
    )
    ts, gt = generate_match(cfg)
    Path(args.out).write_bytes(serialize_track_set(ts))
    if args.ground_truth:
        Path(args.ground_truth).write_text(gt.to_json())
    print(f"wrote {args.out}: frames={ts.meta.frame_count} "
          f"rallies={len(gt.rallies)} events={len(gt.events())}")
    return 0


def cmd_eval(args) -> int:
    repo = MatchRepository(args.store_dir)
    store = repo.store(args.match)
    gt = GroundTruth.from_json(Path(args.ground_truth).read_text())
    gap = args.metrics_gap if args.metrics_gap is not None else 3

    detected = [a for a in store.list_anchors()
                if a.event_type in ("HIT", "BOUNCE")]

    class _Ev:
        def __init__(self, a):
            self.event_type = a.event_type
            self.frame = a.frame_start
            self.x = a.x if a.x is not None else 0.0
            self.y = a.y if a.y is not None else 0.0

    det = [_Ev(a) for a in detected]
    truth = gt.events()
    precision, recall = metrics.precision_recall(det, truth, gap)
    terr = metrics.temporal_error(det, truth, gap)
    serr = metrics.spatial_error(det, truth, gap)

    rallies = store.list_rallies()
    truth_spans = {(r.frame_start, r.frame_end): r for r in gt.rallies}
    exact = 0
    for r in rallies:
        t = truth_spans.get((r.frame_start, r.frame_end))
        if t is not None and r.winner == t.winner:
            exact += 1
    rally_acc = exact / len(gt.rallies) if gt.rallies else 1.0

    print(f"events.detected={len(det)}")
    print(f"events.truth={len(truth)}")
    print(f"events.precision={precision:.6f}")
    print(f"events.recall={recall:.6f}")
    print(f"temporal.mean={terr.mean:.6f}")
    print(f"temporal.max={terr.max:.6f}")
    print(f"spatial.mean={serr.mean:.6f}")
    print(f"spatial.max={serr.max:.6f}")
    print(f"rally.exact={exact}")
    print(f"rally.accuracy={rally_acc:.6f}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="rallykit",
                                     description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse and validate a track file")
    p.add_argument("--track", required=True)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("detect", help="run the full pipeline and persist anchors")
    p.add_argument("--track", required=True)
    p.add_argument("--store-dir", required=True)
    p.add_argument("--video-url")
    _add_config_flags(p)
    p.set_defaults(fn=cmd_detect)

    p = sub.add_parser("serve", help="start the HTTP service")
    p.add_argument("--store-dir", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8008)
    _add_config_flags(p)
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("export", help="export anchors or annotations")
    p.add_argument("--store-dir", required=True)
    p.add_argument("--match", required=True)
    p.add_argument("--format", choices=("anchors", "annotations"),
                   default="anchors")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_export)

    p = sub.add_parser("synth", help="generate a synthetic match")
    p.add_argument("--out", required=True)
    p.add_argument("--ground-truth")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--games", type=int, default=1)
    p.add_argument("--rallies-per-game", dest="rallies_per_game", type=int)
    p.add_argument("--ball-jitter", dest="ball_jitter", type=float, default=0.0)
    p.add_argument("--ball-dropout", dest="ball_dropout", type=float, default=0.0)
    p.add_argument("--ocr-corruption", dest="ocr_corruption", type=float,
                   default=0.0)
    p.add_argument("--scene-flip-rate", dest="scene_flip_rate", type=float,
                   default=0.0)
    p.add_argument("--hand-dropout", dest="hand_dropout", type=float, default=0.0)
    p.add_argument("--distractor-rate", dest="distractor_rate", type=float,
                   default=0.0)
    p.set_defaults(fn=cmd_synth)

    p = sub.add_parser("eval", help="score a detected match against ground truth")
    p.add_argument("--store-dir", required=True)
    p.add_argument("--match", required=True)
    p.add_argument("--ground-truth", required=True)
    p.add_argument("--metrics-gap", dest="metrics_gap", type=int)
    p.set_defaults(fn=cmd_eval)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
