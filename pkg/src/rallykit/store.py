"""Anchor and annotation store with an append-only mutation log.

Anchors are never physically removed: deletion is a status, and every change
goes through the log, so human/machine disagreement stays auditable.  Applying
a mutation record and performing the live operation share one code path; the
log is therefore a faithful replay source by construction, and the replay test
exercises the serialization round trip on top.

Concurrency: one writer per match (an internal lock serializes mutations);
readers get snapshot copies of the dataclasses under the same lock.
"""

from __future__ import annotations

import json
import threading
import time
from dataclasses import dataclass, replace

from .errors import (
    AlreadyDeleted,
    CorruptLog,
    Deleted,
    EventNotFound,
    NotFound,
    OutOfRallyBounds,
    RallyNotFound,
    UnknownContextType,
    ValueNotInVocabulary,
)
from .scores import RallySpan

HIT = "HIT"
BOUNCE = "BOUNCE"
RALLY = "RALLY"
EVENT_TYPES = (HIT, BOUNCE, RALLY)

UNCALIBRATED = "UNCALIBRATED"
CALIBRATED = "CALIBRATED"
DELETED = "DELETED"

DETECTED = "DETECTED"
USER_ADDED = "USER_ADDED"

DEFAULT_VOCABULARY: dict[str, tuple[str, ...]] = {
    "serve_type": ("pendulum", "reverse_pendulum", "tomahawk", "backhand", "hook"),
    "serve_effect": ("ace", "advantage", "neutral", "disadvantage", "fault"),
    "receive_type": ("push", "flick", "loop", "block", "chop"),
    "receive_effect": ("winner", "advantage", "neutral", "disadvantage", "error"),
    "stroke_type": ("drive", "loop", "smash", "push", "block", "lob", "chop"),
    "spin_type": ("topspin", "backspin", "sidespin", "no_spin"),
    "rally_tactic": ("serve_and_attack", "receive_and_attack", "rally_control",
                     "defensive"),
}


@dataclass(frozen=True)
class EventAnchor:
    anchor_id: str
    rally_id: str
    event_type: str
    frame_start: int
    frame_end: int
    x: float | None
    y: float | None
    status: str
    origin: str


@dataclass(frozen=True)
class ContextAnnotation:
    annotation_id: str
    context_type: str
    event_id: str
    value: str
    author: str
    timestamp: float


@dataclass(frozen=True)
class QueryRule:
    server: str | None = None
    winner: str | None = None
    min_strokes: int | None = None
    predicates: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if (self.server is None and self.winner is None
                and self.min_strokes is None and not self.predicates):
            raise ValueError("query rule must set at least one field")


@dataclass(frozen=True)
class MutationRecord:
    seq: int
    kind: str
    payload: dict
    timestamp: float

    def to_line(self) -> str:
        return json.dumps(
            {"seq": self.seq, "kind": self.kind, "ts": self.timestamp,
             "payload": self.payload},
            sort_keys=True,
        )

    @classmethod
    def from_line(cls, line: str) -> "MutationRecord":
        try:
            d = json.loads(line)
            return cls(seq=int(d["seq"]), kind=str(d["kind"]),
                       payload=dict(d["payload"]), timestamp=float(d["ts"]))
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptLog(f"unreadable mutation record: {exc}") from exc


class MatchStore:
    """All anchors, annotations, and rallies of one match."""

    def __init__(self, match_id: str, rallies: list[RallySpan],
                 anchors: list[EventAnchor], frame_count: int,
                 vocabulary: dict[str, tuple[str, ...]] | None = None,
                 video_url: str | None = None,
                 meta: dict | None = None):
        self.match_id = match_id
        self.frame_count = frame_count
        self.video_url = video_url
        self.meta = dict(meta or {})
        self.vocabulary = {k: tuple(v) for k, v in
                           (vocabulary or DEFAULT_VOCABULARY).items()}
        self.rallies: dict[str, RallySpan] = {r.rally_id: r for r in rallies}
        self._rally_order = [r.rally_id for r in
                             sorted(rallies, key=lambda r: r.frame_start)]
        self.anchors: dict[str, EventAnchor] = {a.anchor_id: a for a in anchors}
        self.annotations: dict[tuple[str, str], ContextAnnotation] = {}
        self.log: list[MutationRecord] = []
        self._lock = threading.RLock()
        self.log_sink = None  # callable(str) appending one serialized record

    # -- reads ---------------------------------------------------------------

    def list_rallies(self) -> list[RallySpan]:
        with self._lock:
            return [self.rallies[rid] for rid in self._rally_order]

    def list_anchors(self, rally_id: str | None = None,
                     include_deleted: bool = False) -> list[EventAnchor]:
        with self._lock:
            if rally_id is not None and rally_id not in self.rallies:
                raise RallyNotFound(f"rally {rally_id!r} not found")
            out = [a for a in self.anchors.values()
                   if rally_id is None or a.rally_id == rally_id]
            if not include_deleted:
                out = [a for a in out if a.status != DELETED]
            out.sort(key=lambda a: (a.frame_start, a.anchor_id))
            return out

    def list_annotations(self, event_id: str | None = None) -> list[ContextAnnotation]:
        with self._lock:
            out = [a for a in self.annotations.values()
                   if event_id is None or a.event_id == event_id]
            out.sort(key=lambda a: (a.event_id, a.context_type))
            return out

    def get_anchor(self, anchor_id: str) -> EventAnchor:
        with self._lock:
            a = self.anchors.get(anchor_id)
            if a is None:
                raise NotFound(f"anchor {anchor_id!r} not found")
            return a

    # -- mutations -----------------------------------------------------------

    def calibrate(self, anchor_id: str, delta: int) -> EventAnchor:
        with self._lock:
            self._check_calibrate({"anchor_id": anchor_id, "delta": delta})
            rec = self._log_record("calibrate",
                                   {"anchor_id": anchor_id, "delta": int(delta)})
            self._apply(rec)
            return self.anchors[anchor_id]

    def add_anchor(self, rally_id: str, frame: int, event_type: str,
                   x: float | None = None, y: float | None = None) -> EventAnchor:
        with self._lock:
            payload = {"rally_id": rally_id, "frame": int(frame),
                       "event_type": event_type, "x": x, "y": y}
            self._check_add(payload)
            payload["anchor_id"] = f"{self.match_id}:u{len(self.log) + 1:06d}"
            rec = self._log_record("add", payload)
            self._apply(rec)
            return self.anchors[payload["anchor_id"]]

    def delete_anchor(self, anchor_id: str) -> EventAnchor:
        with self._lock:
            self._check_delete({"anchor_id": anchor_id})
            rec = self._log_record("delete", {"anchor_id": anchor_id})
            self._apply(rec)
            return self.anchors[anchor_id]

    def annotate(self, event_id: str, context_type: str, value: str,
                 author: str = "anonymous") -> ContextAnnotation:
        with self._lock:
            payload = {"event_id": event_id, "context_type": context_type,
                       "value": value, "author": author}
            self._check_annotate(payload)
            payload["annotation_id"] = f"{self.match_id}:n{len(self.log) + 1:06d}"
            rec = self._log_record("annotate", payload)
            self._apply(rec)
            return self.annotations[(event_id, context_type)]

    # -- queries ---------------------------------------------------------------

    def stroke_count(self, rally_id: str) -> int:
        with self._lock:
            return sum(1 for a in self.anchors.values()
                       if a.rally_id == rally_id and a.event_type == HIT
                       and a.status != DELETED)

    def query_rallies(self, rule: QueryRule) -> list[RallySpan]:
        with self._lock:
            out = []
            for rid in self._rally_order:
                r = self.rallies[rid]
                if rule.server is not None and r.server != rule.server:
                    continue
                if rule.winner is not None and r.winner != rule.winner:
                    continue
                if rule.min_strokes is not None and \
                        self.stroke_count(rid) < rule.min_strokes:
                    continue
                if not self._predicates_hold(rid, rule.predicates):
                    continue
                out.append(r)
            return out

    def _predicates_hold(self, rally_id: str,
                         predicates: tuple[tuple[str, str], ...]) -> bool:
        if not predicates:
            return True
        event_ids = {rally_id}
        event_ids.update(a.anchor_id for a in self.anchors.values()
                         if a.rally_id == rally_id and a.status != DELETED)
        for ctx, value in predicates:
            if not any(self.annotations.get((eid, ctx)) is not None
                       and self.annotations[(eid, ctx)].value == value
                       for eid in event_ids):
                return False
        return True

    # -- validation + application (one code path for live and replay) ---------

    def _rally_bounds(self, anchor: EventAnchor) -> tuple[int, int]:
        if anchor.event_type == RALLY:
            return 0, max(self.frame_count - 1, 0)
        rally = self.rallies.get(anchor.rally_id)
        if rally is None:
            return 0, max(self.frame_count - 1, 0)
        return rally.frame_start, rally.frame_end

    def _check_calibrate(self, payload: dict) -> None:
        a = self.anchors.get(payload["anchor_id"])
        if a is None:
            raise NotFound(f"anchor {payload['anchor_id']!r} not found")
        if a.status == DELETED:
            raise Deleted(f"anchor {a.anchor_id!r} is deleted")
        delta = int(payload["delta"])
        lo, hi = self._rally_bounds(a)
        if a.frame_start + delta < lo or a.frame_end + delta > hi:
            raise OutOfRallyBounds(
                f"calibrating {a.anchor_id!r} by {delta} leaves rally bounds "
                f"[{lo}, {hi}]")

    def _check_add(self, payload: dict) -> None:
        rally = self.rallies.get(payload["rally_id"])
        if rally is None:
            raise RallyNotFound(f"rally {payload['rally_id']!r} not found")
        if payload["event_type"] not in EVENT_TYPES:
            raise ValueError(f"unknown event type {payload['event_type']!r}")
        frame = int(payload["frame"])
        if frame < rally.frame_start or frame > rally.frame_end:
            raise OutOfRallyBounds(
                f"frame {frame} outside rally [{rally.frame_start}, "
                f"{rally.frame_end}]")

    def _check_delete(self, payload: dict) -> None:
        a = self.anchors.get(payload["anchor_id"])
        if a is None:
            raise NotFound(f"anchor {payload['anchor_id']!r} not found")
        if a.status == DELETED:
            raise AlreadyDeleted(f"anchor {a.anchor_id!r} already deleted")

    def _check_annotate(self, payload: dict) -> None:
        ctx = payload["context_type"]
        if ctx not in self.vocabulary:
            raise UnknownContextType(f"unknown context type {ctx!r}")
        if payload["value"] not in self.vocabulary[ctx]:
            raise ValueNotInVocabulary(
                f"value {payload['value']!r} not in vocabulary for {ctx!r}")
        eid = payload["event_id"]
        anchor = self.anchors.get(eid)
        if anchor is not None:
            if anchor.status == DELETED:
                raise EventNotFound(f"event {eid!r} is deleted")
        elif eid not in self.rallies:
            raise EventNotFound(f"event {eid!r} not found")

    def _log_record(self, kind: str, payload: dict) -> MutationRecord:
        return MutationRecord(seq=len(self.log) + 1, kind=kind,
                              payload=payload, timestamp=time.time())

    def _apply(self, rec: MutationRecord) -> None:
        payload = rec.payload
        if rec.kind == "calibrate":
            a = self.anchors[payload["anchor_id"]]
            delta = int(payload["delta"])
            self.anchors[a.anchor_id] = replace(
                a, frame_start=a.frame_start + delta,
                frame_end=a.frame_end + delta, status=CALIBRATED)
        elif rec.kind == "add":
            self.anchors[payload["anchor_id"]] = EventAnchor(
                anchor_id=payload["anchor_id"],
                rally_id=payload["rally_id"],
                event_type=payload["event_type"],
                frame_start=int(payload["frame"]),
                frame_end=int(payload["frame"]),
                x=payload.get("x"),
                y=payload.get("y"),
                status=CALIBRATED,   # a human placed it
                origin=USER_ADDED,
            )
        elif rec.kind == "delete":
            a = self.anchors[payload["anchor_id"]]
            self.anchors[a.anchor_id] = replace(a, status=DELETED)
        elif rec.kind == "annotate":
            self.annotations[(payload["event_id"], payload["context_type"])] = \
                ContextAnnotation(
                    annotation_id=payload["annotation_id"],
                    context_type=payload["context_type"],
                    event_id=payload["event_id"],
                    value=payload["value"],
                    author=payload.get("author", "anonymous"),
                    timestamp=rec.timestamp,
                )
        else:
            raise CorruptLog(f"unknown mutation kind {rec.kind!r}")
        self.log.append(rec)
        if self.log_sink is not None:
            self.log_sink(rec.to_line())

    # -- replay ----------------------------------------------------------------

    def replay(self, records: list[MutationRecord]) -> "MatchStore":
        """Apply a recorded mutation sequence onto this (baseline) store."""
        expected = len(self.log) + 1
        for rec in records:
            if rec.seq != expected:
                raise CorruptLog(
                    f"log gap: expected seq {expected}, got {rec.seq}")
            try:
                if rec.kind == "calibrate":
                    self._check_calibrate(rec.payload)
                elif rec.kind == "add":
                    self._check_add(rec.payload)
                elif rec.kind == "delete":
                    self._check_delete(rec.payload)
                elif rec.kind == "annotate":
                    self._check_annotate(rec.payload)
                else:
                    raise CorruptLog(f"unknown mutation kind {rec.kind!r}")
                self._apply(rec)
            except CorruptLog:
                raise
            except Exception as exc:
                raise CorruptLog(f"record {rec.seq} does not apply: {exc}") from exc
            expected += 1
        return self

    # -- export / import ---------------------------------------------------------

    ANNOTATIONS = "ANNOTATIONS"
    ANCHORS = "ANCHORS"

    def export(self, fmt: str) -> bytes:
        with self._lock:
            if fmt == self.ANCHORS:
                lines = [_anchor_line(a) for a in sorted(
                    self.anchors.values(),
                    key=lambda a: (a.rally_id, a.frame_start, a.anchor_id))]
            elif fmt == self.ANNOTATIONS:
                lines = [_annotation_line(a) for a in sorted(
                    self.annotations.values(),
                    key=lambda a: (a.event_id, a.context_type))]
            else:
                raise ValueError(f"unknown export format {fmt!r}")
            return ("\n".join(lines) + ("\n" if lines else "")).encode("utf-8")

    def import_anchors(self, data: bytes) -> None:
        """Replace anchor state with the contents of an ANCHORS export."""
        with self._lock:
            anchors = {}
            for line in data.decode("utf-8").splitlines():
                a = _parse_anchor_line(line)
                anchors[a.anchor_id] = a
            self.anchors = anchors

    def import_annotations(self, data: bytes) -> None:
        with self._lock:
            annotations = {}
            for line in data.decode("utf-8").splitlines():
                a = _parse_annotation_line(line)
                annotations[(a.event_id, a.context_type)] = a
            self.annotations = annotations


def _fmt(v: float | None) -> str:
    return "none" if v is None else repr(float(v))


def _anchor_line(a: EventAnchor) -> str:
    parts = [f"anchor id={a.anchor_id}", f"rally={a.rally_id}",
             f"type={a.event_type}", f"frame_start={a.frame_start}",
             f"frame_end={a.frame_end}"]
    if a.x is not None:
        parts.append(f"x={_fmt(a.x)}")
    if a.y is not None:
        parts.append(f"y={_fmt(a.y)}")
    parts.append(f"status={a.status}")
    parts.append(f"origin={a.origin}")
    return " ".join(parts)


def _annotation_line(a: ContextAnnotation) -> str:
    return (f"annotation id={a.annotation_id} event={a.event_id} "
            f"type={a.context_type} value={a.value} author={a.author} "
            f"ts={repr(a.timestamp)}")


def _kv(line: str, expected_kind: str) -> dict[str, str]:
    tokens = line.split()
    if not tokens or tokens[0] != expected_kind:
        raise ValueError(f"expected {expected_kind!r} record: {line!r}")
    return dict(tok.split("=", 1) for tok in tokens[1:])


def _parse_anchor_line(line: str) -> EventAnchor:
    kv = _kv(line, "anchor")
    return EventAnchor(
        anchor_id=kv["id"], rally_id=kv["rally"], event_type=kv["type"],
        frame_start=int(kv["frame_start"]), frame_end=int(kv["frame_end"]),
        x=float(kv["x"]) if "x" in kv else None,
        y=float(kv["y"]) if "y" in kv else None,
        status=kv["status"], origin=kv["origin"],
    )


def _parse_annotation_line(line: str) -> ContextAnnotation:
    kv = _kv(line, "annotation")
    return ContextAnnotation(
        annotation_id=kv["id"], event_id=kv["event"], context_type=kv["type"],
        value=kv["value"], author=kv["author"], timestamp=float(kv["ts"]),
    )


def detected_anchor_id(rally_id: str, index: int) -> str:
    return f"{rally_id}:e{index:03d}"


def rally_anchor_id(rally_id: str) -> str:
    return f"{rally_id}:rally"
