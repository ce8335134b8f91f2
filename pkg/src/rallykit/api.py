"""HTTP service exposing matches, rallies, anchors, annotations, and queries.

All bodies and responses are JSON.  Errors come back as
``{"error": {"code": ..., "message": ...}}`` where the code is the module
error name, so clients dispatch on codes rather than status text.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .errors import RallyKitError
from .pipeline import MatchRepository, PipelineConfig, SlowdownWindow, playback_hints
from .scores import RallySpan
from .store import ContextAnnotation, EventAnchor, QueryRule

_STATUS_BY_CODE = {
    "NotFound": 404,
    "RallyNotFound": 404,
    "MatchNotFound": 404,
    "EventNotFound": 404,
    "Deleted": 409,
    "AlreadyDeleted": 409,
    "OutOfRallyBounds": 422,
    "UnknownContextType": 422,
    "ValueNotInVocabulary": 422,
    "EmptyInput": 422,
    "NoSegments": 422,
    "MissingHeader": 422,
    "CorruptLog": 500,
}


class CalibrateBody(BaseModel):
    delta: int


class AddAnchorBody(BaseModel):
    frame: int
    type: str
    x: float | None = None
    y: float | None = None


class AnnotateBody(BaseModel):
    event_id: str
    context_type: str
    value: str
    author: str = "anonymous"


class QueryBody(BaseModel):
    server: str | None = None
    winner: str | None = None
    min_strokes: int | None = None
    predicates: list[tuple[str, str]] = []


def _rally_json(r: RallySpan) -> dict:
    return {"rally_id": r.rally_id, "game_index": r.game_index,
            "frame_start": r.frame_start, "frame_end": r.frame_end,
            "server": r.server, "winner": r.winner, "flagged": r.flagged}


def _anchor_json(a: EventAnchor) -> dict:
    return {"anchor_id": a.anchor_id, "rally_id": a.rally_id,
            "event_type": a.event_type, "frame_start": a.frame_start,
            "frame_end": a.frame_end, "x": a.x, "y": a.y,
            "status": a.status, "origin": a.origin}


def _annotation_json(a: ContextAnnotation) -> dict:
    return {"annotation_id": a.annotation_id, "event_id": a.event_id,
            "context_type": a.context_type, "value": a.value,
            "author": a.author, "timestamp": a.timestamp}


def _hint_json(w: SlowdownWindow) -> dict:
    return {"frame_from": w.frame_from, "frame_to": w.frame_to,
            "rate": w.rate, "pause_at": w.pause_at}


def create_app(repo: MatchRepository,
               config: PipelineConfig = PipelineConfig()) -> FastAPI:
    app = FastAPI(title="rallykit", version="0.1.0")

    @app.exception_handler(RallyKitError)
    async def _domain_error(request: Request, exc: RallyKitError):
        status = _STATUS_BY_CODE.get(exc.code, 400)
        return JSONResponse(status_code=status,
                            content={"error": {"code": exc.code,
                                               "message": exc.message}})

    @app.get("/matches")
    def list_matches():
        out = []
        for mid in repo.match_ids():
            st = repo.store(mid)
            out.append({"match_id": mid,
                        "frame_count": st.frame_count,
                        "fps": st.meta.get("fps"),
                        "width": st.meta.get("width"),
                        "height": st.meta.get("height"),
                        "video_url": st.video_url,
                        "rally_count": len(st.list_rallies())})
        return {"matches": out}

    @app.get("/matches/{match_id}/rallies")
    def list_rallies(match_id: str):
        st = repo.store(match_id)
        return {"rallies": [_rally_json(r) for r in st.list_rallies()]}

    @app.get("/matches/{match_id}/vocabulary")
    def vocabulary(match_id: str):
        st = repo.store(match_id)
        return {"vocabulary": {k: list(v) for k, v in st.vocabulary.items()}}

    @app.get("/rallies/{rally_id}/anchors")
    def list_anchors(rally_id: str, include_deleted: bool = False):
        st = repo.store_for_rally(rally_id)
        anchors = st.list_anchors(rally_id, include_deleted=include_deleted)
        return {"anchors": [_anchor_json(a) for a in anchors]}

    @app.post("/rallies/{rally_id}/anchors")
    def add_anchor(rally_id: str, body: AddAnchorBody):
        st = repo.store_for_rally(rally_id)
        a = st.add_anchor(rally_id, body.frame, body.type, body.x, body.y)
        return _anchor_json(a)

    @app.post("/anchors/{anchor_id}/calibrate")
    def calibrate(anchor_id: str, body: CalibrateBody):
        st = repo.store_for_rally(anchor_id)
        return _anchor_json(st.calibrate(anchor_id, body.delta))

    @app.delete("/anchors/{anchor_id}")
    def delete_anchor(anchor_id: str):
        st = repo.store_for_rally(anchor_id)
        return _anchor_json(st.delete_anchor(anchor_id))

    @app.put("/annotations")
    def annotate(body: AnnotateBody):
        st = repo.store_for_rally(body.event_id)
        ann = st.annotate(body.event_id, body.context_type, body.value,
                          body.author)
        return _annotation_json(ann)

    @app.get("/annotations")
    def list_annotations(event_id: str):
        st = repo.store_for_rally(event_id)
        return {"annotations": [_annotation_json(a)
                                for a in st.list_annotations(event_id)]}

    @app.post("/matches/{match_id}/query")
    def query(match_id: str, body: QueryBody):
        st = repo.store(match_id)
        try:
            rule = QueryRule(server=body.server, winner=body.winner,
                             min_strokes=body.min_strokes,
                             predicates=tuple((c, v) for c, v in body.predicates))
        except ValueError as exc:
            return JSONResponse(status_code=422,
                                content={"error": {"code": "InvalidRule",
                                                   "message": str(exc)}})
        return {"rallies": [_rally_json(r) for r in st.query_rallies(rule)]}

    @app.get("/rallies/{rally_id}/playback-hints")
    def hints(rally_id: str):
        st = repo.store_for_rally(rally_id)
        windows = playback_hints(st, rally_id, config.slowdown_lead,
                                 config.slowdown_rate)
        return {"windows": [_hint_json(w) for w in windows]}

    return app
