"""Annotation session service with an append-only label log.

The log file is the single source of truth: every session creation and label
submission is appended (and fsynced) before it is acknowledged, and in-memory
session state is rebuilt from the log on startup. During round-feedback
sessions the model's predictions are never exposed to the annotator.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI
from fastapi.responses import FileResponse, JSONResponse

from panelscope.corpus import (
    Corpus,
    PanelPair,
    TransitionLabel,
    load_corpus,
)
from panelscope.errors import ValidationError


@dataclass
class Session:
    session_id: str
    annotator_id: str
    queue: list[PanelPair]
    mode: str = "ground_truth"
    round_index: int | None = None
    completed: dict[PanelPair, TransitionLabel] = field(default_factory=dict)

    @property
    def pending(self) -> list[PanelPair]:
        return [p for p in self.queue if p not in self.completed]

    @property
    def done(self) -> bool:
        return len(self.completed) == len(self.queue)


class AnnotationService:
    """In-memory session store rebuilt from, and persisted to, a line log."""

    def __init__(self, log_path: str | Path, corpus: Corpus | None = None):
        self.log_path = Path(log_path)
        self.corpus = corpus
        self.sessions: dict[str, Session] = {}
        self._lock = threading.Lock()
        if self.log_path.exists():
            self._replay()
        self._log = self.log_path.open("a", encoding="utf-8")

    def _replay(self) -> None:
        with self.log_path.open(encoding="utf-8") as f:
            for line in f:
                line = line.strip()
                if not line:
                    continue
                event = json.loads(line)
                if event["event"] == "session_created":
                    session = Session(
                        event["session_id"],
                        event["annotator_id"],
                        [PanelPair.from_dict(p) for p in event["pairs"]],
                        event.get("mode", "ground_truth"),
                        event.get("round_index"),
                    )
                    self.sessions[session.session_id] = session
                elif event["event"] == "label":
                    session = self.sessions[event["session_id"]]
                    session.completed[PanelPair.from_dict(event["pair"])] = (
                        TransitionLabel.from_code(event["label"])
                    )

    def _append(self, event: dict) -> None:
        self._log.write(json.dumps(event) + "\n")
        self._log.flush()
        os.fsync(self._log.fileno())

    def create_session(
        self,
        annotator_id: str,
        pairs: list[PanelPair],
        mode: str = "ground_truth",
        round_index: int | None = None,
    ) -> tuple[Session, int]:
        if not annotator_id:
            raise ValidationError("annotator_id must be non-empty")
        if not pairs:
            raise ValidationError("session needs at least one pair")
        if mode not in ("ground_truth", "round_feedback"):
            raise ValidationError(f"unknown session mode {mode!r}")
        deduped: list[PanelPair] = []
        seen: set[PanelPair] = set()
        for p in pairs:
            if p not in seen:
                seen.add(p)
                deduped.append(p)
        dropped = len(pairs) - len(deduped)
        session = Session(uuid.uuid4().hex, annotator_id, deduped, mode, round_index)
        with self._lock:
            self.sessions[session.session_id] = session
            self._append(
                {
                    "event": "session_created",
                    "session_id": session.session_id,
                    "annotator_id": annotator_id,
                    "mode": mode,
                    "round_index": round_index,
                    "pairs": [p.to_dict() for p in deduped],
                }
            )
        return session, dropped

    def submit_label(self, session_id: str, pair: PanelPair, label: TransitionLabel) -> Session:
        with self._lock:
            session = self.sessions[session_id]
            if pair not in session.queue:
                raise KeyError(f"pair {pair.key_str} is not part of the session")
            if pair in session.completed:
                raise ConflictError(f"pair {pair.key_str} is already labeled")
            self._append(
                {
                    "event": "label",
                    "session_id": session_id,
                    "pair": pair.to_dict(),
                    "label": label.name,
                }
            )
            session.completed[pair] = label
        return session

    def image_refs(self, pair: PanelPair) -> tuple[str, str] | None:
        if self.corpus is None:
            return None
        first = self.corpus.panels.get(pair.first_key)
        second = self.corpus.panels.get(pair.second_key)
        if first is None or second is None or first.image_ref is None or second.image_ref is None:
            return None
        return first.image_ref, second.image_ref

    def close(self) -> None:
        self._log.close()


class ConflictError(Exception):
    pass


def _progress(session: Session) -> dict:
    return {"completed": len(session.completed), "total": len(session.queue)}


def build_app(log_path: str | Path, corpus: Corpus | str | Path | None = None) -> FastAPI:
    if isinstance(corpus, (str, Path)):
        corpus = load_corpus(corpus)
    service = AnnotationService(log_path, corpus)
    app = FastAPI(title="panelscope annotation service")
    app.state.service = service

    @app.post("/sessions")
    def create_session(body: dict):
        try:
            pairs = [PanelPair.from_dict(p) for p in body.get("pairs", [])]
            session, dropped = service.create_session(
                str(body.get("annotator_id", "")),
                pairs,
                body.get("mode", "ground_truth"),
                body.get("round_index"),
            )
        except (ValidationError, KeyError, TypeError) as e:
            return JSONResponse({"error": str(e)}, status_code=400)
        resp = {"session_id": session.session_id, "total": len(session.queue)}
        if dropped:
            resp["warning"] = f"{dropped} duplicate pair(s) removed"
        return resp

    @app.get("/sessions/{session_id}/next")
    def next_task(session_id: str):
        session = service.sessions.get(session_id)
        if session is None:
            return JSONResponse({"error": "unknown session"}, status_code=404)
        pending = session.pending
        if not pending:
            summary = {label.name: 0 for label in TransitionLabel}
            for label in session.completed.values():
                summary[label.name] += 1
            return {"status": "complete", "summary": summary, "progress": _progress(session)}
        pair = pending[0]
        refs = service.image_refs(pair)
        return {
            "status": "pending",
            "pair": pair.to_dict(),
            "pair_key": pair.key_str,
            "image_refs": list(refs) if refs else None,
            "mode": session.mode,
            "progress": _progress(session),
        }

    @app.post("/sessions/{session_id}/labels")
    def submit_label(session_id: str, body: dict):
        if session_id not in service.sessions:
            return JSONResponse({"error": "unknown session"}, status_code=404)
        try:
            pair = PanelPair.from_dict(body["pair"])
            label = TransitionLabel.from_code(body["label"])
        except (ValidationError, KeyError, TypeError) as e:
            return JSONResponse({"error": str(e)}, status_code=400)
        try:
            session = service.submit_label(session_id, pair, label)
        except ConflictError as e:
            return JSONResponse({"error": str(e)}, status_code=409)
        except KeyError as e:
            return JSONResponse({"error": str(e)}, status_code=409)
        return {"status": "ok", "progress": _progress(session), "done": session.done}

    @app.get("/sessions/{session_id}/progress")
    def progress(session_id: str):
        session = service.sessions.get(session_id)
        if session is None:
            return JSONResponse({"error": "unknown session"}, status_code=404)
        resp = {**_progress(session), "done": session.done}
        if session.done:
            resp["labels"] = [
                {"pair": pair.to_dict(), "label": label.name}
                for pair, label in session.completed.items()
            ]
        return resp

    @app.get("/pairs/{key}/images")
    def pair_images(key: str):
        try:
            pair = PanelPair.from_key_str(key)
        except ValidationError as e:
            return JSONResponse({"error": str(e)}, status_code=400)
        refs = service.image_refs(pair)
        if refs is None:
            return JSONResponse({"error": "no images for pair"}, status_code=404)
        return {"first": refs[0], "second": refs[1]}

    @app.get("/pairs/{key}/images/{which}")
    def pair_image_file(key: str, which: str):
        try:
            pair = PanelPair.from_key_str(key)
        except ValidationError as e:
            return JSONResponse({"error": str(e)}, status_code=400)
        refs = service.image_refs(pair)
        if refs is None or which not in ("first", "second"):
            return JSONResponse({"error": "no image"}, status_code=404)
        path = Path(refs[0] if which == "first" else refs[1])
        if not path.exists():
            return JSONResponse({"error": "image file missing"}, status_code=404)
        return FileResponse(path)

    return app
