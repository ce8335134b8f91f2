"""rallykit: event anchors for racket-sports video annotation.

Converts noisy per-frame object tracks (ball, poses, scoreboard, scene
labels) into calibratable event anchors, stores them behind an append-only
log, and serves them to an interactive annotator over HTTP.
"""

from .errors import RallyKitError
from .pipeline import MatchRepository, PipelineConfig, SlowdownWindow, playback_hints
from .scores import GameSpan, RallySpan, ScoreState, clean_scores, detect_games, rally_boundaries
from .scenes import InPlaySegment, segments, smooth_labels
from .store import ContextAnnotation, EventAnchor, MatchStore, MutationRecord, QueryRule
from .synth import GroundTruth, SynthConfig, generate_match
from .tracks import BallTrack, CourtRegion, TrackSet, interpolate_ball, parse_track_file, serialize_track_set, validate

__version__ = "0.1.0"

__all__ = [
    "RallyKitError",
    "MatchRepository",
    "PipelineConfig",
    "SlowdownWindow",
    "playback_hints",
    "GameSpan",
    "RallySpan",
    "ScoreState",
    "clean_scores",
    "detect_games",
    "rally_boundaries",
    "InPlaySegment",
    "segments",
    "smooth_labels",
    "ContextAnnotation",
    "EventAnchor",
    "MatchStore",
    "MutationRecord",
    "QueryRule",
    "GroundTruth",
    "SynthConfig",
    "generate_match",
    "BallTrack",
    "CourtRegion",
    "TrackSet",
    "interpolate_ball",
    "parse_track_file",
    "serialize_track_set",
    "validate",
    "__version__",
]
