"""HTTP backend for blind pairwise transcript annotation.

Serves blind tasks and audio to the browser UI, persists preference
records durably (write-ahead log before acknowledgment), and keeps
per-annotator sessions resumable across process restarts.

The service never reads the resolution key file, so no response can leak
which transcript is gold: resolution happens offline in the audit
pipeline. The records file it maintains is schema-identical to the
pipeline's records JSONL and feeds compile_report directly.

Storage layout inside the campaign directory:
    campaign.json   campaign definition (tasks path, audio root, annotators)
    sessions.json   session snapshot (cursor per session), advisory only
    wal.jsonl       append-only record log, fsync'd before every ack
    records.jsonl   compacted view, one record per (annotator, task)
"""

from __future__ import annotations

import datetime
import json
import mimetypes
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import FastAPI, HTTPException, Request, Response
from fastapi.middleware.cors import CORSMiddleware

from phonaudit.errors import InvalidChoice
from phonaudit.pipeline import (
    AnnotationTask,
    PreferenceRecord,
    load_tasks,
    read_jsonl,
    write_json,
    write_jsonl,
)


@dataclass
class Session:
    session_id: str
    annotator_id: str
    task_ids: list[str]
    cursor: int = 0
    records: dict[str, PreferenceRecord] = field(default_factory=dict)

    def first_unsubmitted(self) -> int:
        for i, task_id in enumerate(self.task_ids):
            if task_id not in self.records:
                return i
        return len(self.task_ids)


class CampaignStore:
    """Single-writer state for one annotation campaign.

    All mutation goes through a process-wide lock; every acknowledged
    submit has already been appended and fsync'd to the write-ahead log.
    """

    def __init__(self, campaign_dir: str | Path):
        self.dir = Path(campaign_dir)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.lock = threading.Lock()
        self.tasks: dict[str, AnnotationTask] = {}
        self.task_order: list[str] = []
        self.audio_root = Path(".")
        self.audio_by_utterance: dict[str, Path] = {}
        self.sessions: dict[str, Session] = {}
        if (self.dir / "campaign.json").exists():
            self._load_from_disk()

    # -- campaign lifecycle -------------------------------------------------

    def initialize(self, tasks_path: str, annotators: list[str],
                   audio_root: str = ".") -> None:
        if not annotators:
            raise ValueError("at least one annotator is required")
        if len(set(annotators)) != len(annotators):
            raise ValueError("annotator ids must be unique")
        write_json(
            self.dir / "campaign.json",
            {"tasks_path": tasks_path, "audio_root": audio_root,
             "annotators": list(annotators)},
        )
        self._load_from_disk()

    def _load_from_disk(self) -> None:
        with open(self.dir / "campaign.json", encoding="utf-8") as fh:
            campaign = json.load(fh)
        blind = load_tasks(campaign["tasks_path"])  # no key file: stays blind
        self.tasks = {t.task_id: t for t in blind}
        self.task_order = [t.task_id for t in blind]
        self.audio_root = Path(campaign["audio_root"])
        self.audio_by_utterance = {
            t.utterance_id: self.audio_root / t.audio_path for t in blind
        }
        self.sessions = {
            annotator: Session(
                session_id=annotator,
                annotator_id=annotator,
                task_ids=list(self.task_order),
            )
            for annotator in campaign["annotators"]
        }
        self._replay_wal()
        self._snapshot()

    def _replay_wal(self) -> None:
        wal = self.dir / "wal.jsonl"
        if not wal.exists():
            return
        by_annotator = {s.annotator_id: s for s in self.sessions.values()}
        for row in read_jsonl(wal):
            session = by_annotator.get(row["annotator_id"])
            if session is None or row["task_id"] not in self.tasks:
                continue  # stale entry from an older campaign in this directory
            session.records[row["task_id"]] = PreferenceRecord.from_dict(row)
        for session in self.sessions.values():
            session.cursor = session.first_unsubmitted()

    # -- persistence --------------------------------------------------------

    def _append_wal(self, record: PreferenceRecord) -> None:
        with open(self.dir / "wal.jsonl", "a", encoding="utf-8") as fh:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False,
                                sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def _snapshot(self) -> None:
        write_json(
            self.dir / "sessions.json",
            {
                "sessions": {
                    s.session_id: {
                        "annotator_id": s.annotator_id,
                        "cursor": s.cursor,
                        "submitted": len(s.records),
                    }
                    for s in self.sessions.values()
                }
            },
        )
        compacted = [
            s.records[task_id].to_dict()
            for s in sorted(self.sessions.values(), key=lambda s: s.session_id)
            for task_id in s.task_ids
            if task_id in s.records
        ]
        write_jsonl(self.dir / "records.jsonl", compacted)

    # -- session operations -------------------------------------------------

    def get_session(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            raise HTTPException(404, f"unknown session {session_id!r}")
        return session

    def task_view(self, session: Session, index: int) -> dict:
        if index < 0 or index > session.cursor:
            raise HTTPException(
                409, f"index {index} is outside the visited range "
                     f"[0, {session.cursor}]"
            )
        if index >= len(session.task_ids):
            raise HTTPException(409, "session complete")
        task = self.tasks[session.task_ids[index]]
        saved = session.records.get(task.task_id)
        # Annotators must not see which model produced the non-gold side,
        # so model_id stays server-side along with the resolution key.
        view = {k: v for k, v in task.blind_dict().items() if k != "model_id"}
        return {
            "task": {**view, "index": index,
                     "total": len(session.task_ids)},
            "record": saved.to_dict() if saved else None,
        }

    def submit(self, session: Session, payload: dict) -> dict:
        task_id = payload.get("task_id")
        if not isinstance(task_id, str) or task_id not in self.tasks:
            raise HTTPException(404, f"unknown task {task_id!r}")
        try:
            position = session.task_ids.index(task_id)
        except ValueError:
            raise HTTPException(404, f"task {task_id!r} not in session")
        if position > session.cursor:
            raise HTTPException(
                409, f"stale session: task {task_id!r} has not been reached yet"
            )
        try:
            record = PreferenceRecord(
                task_id=task_id,
                annotator_id=session.annotator_id,
                choice=_parse_choice(payload.get("choice")),
                influential_words=_parse_word_indices(
                    payload.get("influential_words", [])),
                timestamp=payload.get("timestamp")
                or datetime.datetime.now(datetime.timezone.utc).isoformat(),
                playback_speeds=tuple(
                    float(s) for s in payload.get("playback_speeds", [])),
            )
        except InvalidChoice as exc:
            raise HTTPException(422, str(exc))
        self._append_wal(record)  # durable before acknowledgment
        session.records[task_id] = record  # last write wins on revisits
        if position == session.cursor:
            session.cursor += 1
        self._snapshot()
        return {
            "accepted": True,
            "task_id": task_id,
            "index": session.cursor,
            "total": len(session.task_ids),
        }

    def progress(self, session: Session) -> dict:
        return {
            "session_id": session.session_id,
            "annotator_id": session.annotator_id,
            "index": session.cursor,
            "total": len(session.task_ids),
            "submitted": len(session.records),
            "complete": session.cursor >= len(session.task_ids),
        }


def _parse_choice(value: object):
    from phonaudit.pipeline import Choice

    try:
        return Choice(value)
    except ValueError:
        raise HTTPException(
            422, f"invalid choice {value!r}; expected one of "
                 f"{[c.value for c in Choice]}"
        )


def _parse_word_indices(value: object) -> tuple[int, ...]:
    if not isinstance(value, (list, tuple)):
        raise HTTPException(422, "influential_words must be a list of word indices")
    try:
        return tuple(int(i) for i in value)
    except (TypeError, ValueError):
        raise HTTPException(422, "influential_words must be a list of word indices")


# ---------------------------------------------------------------------------
# HTTP layer

def create_app(campaign_dir: str | Path) -> FastAPI:
    store = CampaignStore(campaign_dir)
    app = FastAPI(title="phonaudit annotation service")
    app.state.store = store
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.post("/campaign")
    async def load_campaign(request: Request) -> dict:
        payload = await request.json()
        with store.lock:
            try:
                store.initialize(
                    tasks_path=payload["tasks_path"],
                    annotators=payload.get("annotators", []),
                    audio_root=payload.get("audio_root", "."),
                )
            except (KeyError, ValueError, FileNotFoundError) as exc:
                raise HTTPException(422, str(exc))
            return {
                "n_tasks": len(store.task_order),
                "sessions": [
                    store.progress(store.sessions[sid])
                    for sid in sorted(store.sessions)
                ],
            }

    @app.get("/session/{session_id}/next")
    async def next_task(session_id: str, index: int | None = None) -> dict:
        with store.lock:
            session = store.get_session(session_id)
            return store.task_view(
                session, session.cursor if index is None else index
            )

    @app.post("/session/{session_id}/submit")
    async def submit(session_id: str, request: Request) -> dict:
        payload = await request.json()
        with store.lock:
            session = store.get_session(session_id)
            return store.submit(session, payload)

    @app.get("/session/{session_id}/progress")
    async def progress(session_id: str) -> dict:
        with store.lock:
            session = store.get_session(session_id)
            return store.progress(session)

    @app.get("/audio/{utterance_id}")
    async def audio(utterance_id: str, request: Request) -> Response:
        with store.lock:
            path = store.audio_by_utterance.get(utterance_id)
        if path is None or not path.is_file():
            raise HTTPException(404, f"no audio for utterance {utterance_id!r}")
        return _serve_file(path, request.headers.get("range"))

    return app


def _serve_file(path: Path, range_header: str | None) -> Response:
    """Serve a file with single-range request support for audio seeking."""
    data = path.read_bytes()
    size = len(data)
    media_type = mimetypes.guess_type(path.name)[0] or "application/octet-stream"
    headers = {"accept-ranges": "bytes"}
    if range_header is None:
        return Response(data, media_type=media_type, headers=headers)

    span = _parse_range(range_header, size)
    if span is None:
        headers["content-range"] = f"bytes */{size}"
        return Response(status_code=416, headers=headers)
    start, end = span
    headers["content-range"] = f"bytes {start}-{end}/{size}"
    return Response(
        data[start:end + 1], status_code=206, media_type=media_type,
        headers=headers,
    )


def _parse_range(header: str, size: int) -> tuple[int, int] | None:
    """First byte range of a `bytes=` header, or None when unsatisfiable."""
    if not header.startswith("bytes=") or size == 0:
        return None
    range_expr = header[len("bytes="):].split(",")[0].strip()
    first, _, last = range_expr.partition("-")
    try:
        if first == "":  # suffix form: last N bytes
            length = int(last)
            if length <= 0:
                return None
            return max(0, size - length), size - 1
        start = int(first)
        end = int(last) if last else size - 1
    except ValueError:
        return None
    if start >= size or start > end:
        return None
    return start, min(end, size - 1)
