"""Long-running monitor process behind an HTTP API.

Holds one immutable structure snapshot plus an append-only log of
classified events. Ingestion is serialized through a single writer
lock; queries and the live stream read consistent snapshots. Replacing
the structure swaps the snapshot atomically: existing events keep the
verdicts they were classified under, tagged with that snapshot's id,
and scenes never mix events from two snapshots.
"""
from __future__ import annotations

import json
import queue
import threading
from collections import Counter, deque
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse, StreamingResponse

from .capture import CaptureParseError, parse_capture_line
from .classify import ClassifiedRequest, LevelStatus, classify, find_destination_group, worst_status
from .model import ApplicationStructure, DestinationGroup, stable_digest
from .scenes import CircleScene, DetailScene, LaneScene, layout_control, layout_form, layout_overview
from .structure_io import StructureLoadError, structure_digest, structure_from_dict

__all__ = [
    "Monitor",
    "MonitorError",
    "NotFoundError",
    "UNKNOWN_GROUP_ID",
    "group_id_for",
    "create_app",
]

UNKNOWN_GROUP_ID = "unknown"
UNKNOWN_GROUP_LABEL = "(unknown destination)"

_STATUS_KEYS = [status.value for status in LevelStatus]


class MonitorError(RuntimeError):
    pass


class NotFoundError(KeyError):
    def __init__(self, what: str, identifier: str):
        super().__init__(f"{what} {identifier!r} not found")
        self.what = what
        self.identifier = identifier


def group_id_for(destination: str) -> str:
    return stable_digest("group", destination)[:12]


@dataclass(frozen=True)
class StoredEvent:
    seq: int
    classified: ClassifiedRequest
    group_id: str
    form_id: str | None
    snapshot_id: str

    def envelope(self) -> dict:
        return {
            "seq": self.seq,
            "group_id": self.group_id,
            "snapshot_id": self.snapshot_id,
            "verdict": self.classified.to_dict(),
        }


class _Subscription:
    def __init__(self, monitor: "Monitor"):
        self._monitor = monitor
        self.events: "queue.Queue[dict | None]" = queue.Queue()

    def get(self, timeout: float | None = None) -> dict | None:
        return self.events.get(timeout=timeout)

    def close(self) -> None:
        self._monitor._unsubscribe(self)


class Monitor:
    """Monitor state: one structure snapshot, one classified event log."""

    def __init__(
        self,
        structure: ApplicationStructure | None = None,
        *,
        retention: int = 100_000,
        journal_path: str | Path | None = None,
        allow_missing_referer: bool = False,
    ):
        if retention < 1:
            raise ValueError("retention must be >= 1")
        self._lock = threading.Lock()
        self._retention = retention
        self._allow_missing_referer = allow_missing_referer
        self._journal_path = Path(journal_path) if journal_path else None
        self._structure: ApplicationStructure | None = None
        self._snapshot_id = ""
        self._group_by_id: dict[str, DestinationGroup] = {}
        self._events: deque[StoredEvent] = deque()
        self._accepted = 0
        self._group_counts: dict[str, Counter] = {}
        self._form_counts: dict[str, Counter] = {}
        self._subscribers: list[_Subscription] = []
        if structure is not None:
            self.set_structure(structure)
        if self._journal_path is not None and self._journal_path.exists():
            self._replay_journal()

    # -- structure snapshot ------------------------------------------------

    def set_structure(self, structure: ApplicationStructure) -> str:
        with self._lock:
            self._structure = structure
            self._snapshot_id = structure_digest(structure)
            self._group_by_id = {
                group_id_for(group.destination_page): group for group in structure.groups
            }
            return self._snapshot_id

    @property
    def snapshot_id(self) -> str:
        return self._snapshot_id

    @property
    def structure(self) -> ApplicationStructure | None:
        return self._structure

    # -- ingestion ---------------------------------------------------------

    def ingest_lines(self, lines: Iterable[str] | str) -> dict:
        """Classify and append each parseable line; rejects never abort."""
        if isinstance(lines, str):
            lines = lines.splitlines()
        accepted = 0
        rejected: list[dict] = []
        with self._lock:
            if self._structure is None:
                raise MonitorError("no structure loaded; PUT a structure document first")
            for raw in lines:
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                seq = self._accepted + 1
                try:
                    request = parse_capture_line(
                        line, base_url=self._structure.base_url, line_no=seq, file_id="evt"
                    )
                except CaptureParseError as exc:
                    rejected.append({"line": raw, "reason": exc.reason})
                    continue
                classified = classify(
                    request,
                    self._structure,
                    allow_missing_referer=self._allow_missing_referer,
                )
                self._accepted = seq
                self._append(seq, classified, line)
                accepted += 1
        return {"accepted": accepted, "rejected": rejected}

    def _append(self, seq: int, classified: ClassifiedRequest, raw_line: str) -> None:
        assert self._structure is not None
        group = find_destination_group(classified.request, self._structure)
        group_id = (
            group_id_for(group.destination_page) if group is not None else UNKNOWN_GROUP_ID
        )
        form_id = classified.l1.matched_form_id
        event = StoredEvent(
            seq=seq,
            classified=classified,
            group_id=group_id,
            form_id=form_id,
            snapshot_id=self._snapshot_id,
        )
        self._events.append(event)
        if len(self._events) > self._retention:
            self._events.popleft()

        status = classified.overall.value
        self._group_counts.setdefault(group_id, Counter())[status] += 1
        if form_id is not None:
            self._form_counts.setdefault(form_id, Counter())[status] += 1

        if self._journal_path is not None:
            with self._journal_path.open("a", encoding="utf-8") as journal:
                journal.write(raw_line + "\n")

        envelope = event.envelope()
        for subscription in list(self._subscribers):
            subscription.events.put(envelope)

    def _replay_journal(self) -> None:
        assert self._journal_path is not None
        text = self._journal_path.read_text(encoding="utf-8")
        journal, self._journal_path = self._journal_path, None
        try:
            if text.strip():
                self.ingest_lines(text)
        finally:
            self._journal_path = journal

    # -- queries -----------------------------------------------------------

    def _counts_dict(self, counter: Counter | None) -> dict:
        counter = counter or Counter()
        return {key: counter.get(key, 0) for key in _STATUS_KEYS}

    def _worst(self, counter: Counter | None) -> str:
        counter = counter or Counter()
        present = [LevelStatus(key) for key, n in counter.items() if n > 0]
        return worst_status(present).value if present else LevelStatus.NORMAL.value

    def overview(self) -> dict:
        with self._lock:
            if self._structure is None:
                raise MonitorError("no structure loaded")
            rows = []
            for group in self._structure.groups:
                gid = group_id_for(group.destination_page)
                counter = self._group_counts.get(gid)
                rows.append(
                    {
                        "group_id": gid,
                        "destination": group.destination_page,
                        "form_count": len(group.forms),
                        "counts": self._counts_dict(counter),
                        "worst_status": self._worst(counter),
                    }
                )
            unknown = self._group_counts.get(UNKNOWN_GROUP_ID)
            if unknown and sum(unknown.values()) > 0:
                rows.append(
                    {
                        "group_id": UNKNOWN_GROUP_ID,
                        "destination": UNKNOWN_GROUP_LABEL,
                        "form_count": 0,
                        "counts": self._counts_dict(unknown),
                        "worst_status": self._worst(unknown),
                    }
                )
            return {
                "snapshot_id": self._snapshot_id,
                "event_count": self._accepted,
                "rows": rows,
            }

    def _find_event(self, request_id: str) -> StoredEvent:
        for event in self._events:
            if event.classified.request.request_id == request_id:
                return event
        raise NotFoundError("request", request_id)

    def group_scene(self, group_id: str) -> CircleScene:
        with self._lock:
            if self._structure is None:
                raise MonitorError("no structure loaded")
            if group_id == UNKNOWN_GROUP_ID:
                group = DestinationGroup(destination_page=UNKNOWN_GROUP_LABEL, forms=())
            else:
                found = self._group_by_id.get(group_id)
                if found is None:
                    raise NotFoundError("group", group_id)
                group = found
            classified = [
                event.classified
                for event in self._events
                if event.group_id == group_id and event.snapshot_id == self._snapshot_id
            ]
            return layout_overview(group, classified)

    def form_scene(self, form_id: str, request_id: str) -> LaneScene:
        with self._lock:
            if self._structure is None:
                raise MonitorError("no structure loaded")
            form = self._structure.find_form(form_id)
            if form is None:
                raise NotFoundError("form", form_id)
            event = self._find_event(request_id)
            if event.form_id != form_id:
                raise NotFoundError("request matched to form", f"{form_id}/{request_id}")
            return layout_form(form, event.classified)

    def control_scene(self, form_id: str, request_id: str, order_index: int) -> DetailScene:
        with self._lock:
            if self._structure is None:
                raise MonitorError("no structure loaded")
            form = self._structure.find_form(form_id)
            if form is None:
                raise NotFoundError("form", form_id)
            control = form.control_at(order_index)
            if control is None:
                raise NotFoundError("control", f"{form_id}@{order_index}")
            event = self._find_event(request_id)
            if event.form_id != form_id:
                raise NotFoundError("request matched to form", f"{form_id}/{request_id}")
            for check in event.classified.l3:
                if check.control_order == order_index:
                    observed = event.classified.request.params[check.param_index][1]
                    return layout_control(control, observed, list(check.verdicts))
            raise NotFoundError("observed value for control", f"{form_id}@{order_index}")

    # -- live stream ---------------------------------------------------------

    def subscribe(self) -> _Subscription:
        subscription = _Subscription(self)
        with self._lock:
            self._subscribers.append(subscription)
        return subscription

    def _unsubscribe(self, subscription: _Subscription) -> None:
        with self._lock:
            if subscription in self._subscribers:
                self._subscribers.remove(subscription)

    # -- audit ---------------------------------------------------------------

    def counters(self) -> dict:
        with self._lock:
            return {
                "groups": {gid: dict(c) for gid, c in self._group_counts.items()},
                "forms": {fid: dict(c) for fid, c in self._form_counts.items()},
            }


def create_app(monitor: Monitor, *, keepalive_seconds: float = 15.0) -> FastAPI:
    """FastAPI application exposing the monitor's HTTP contract."""
    app = FastAPI(title="formwatch monitor", version="0.1.0")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )

    @app.exception_handler(NotFoundError)
    async def _not_found(_request, exc: NotFoundError):
        return JSONResponse(status_code=404, content={"error": str(exc), "missing": exc.identifier})

    @app.exception_handler(MonitorError)
    async def _monitor_error(_request, exc: MonitorError):
        return JSONResponse(status_code=409, content={"error": str(exc)})

    @app.get("/api/health")
    def health() -> dict:
        return {
            "service": "formwatch",
            "snapshot_id": monitor.snapshot_id,
            "structure_loaded": monitor.structure is not None,
        }

    @app.put("/api/structure")
    async def put_structure(request: Request):
        try:
            doc = json.loads(await request.body())
            structure = structure_from_dict(doc)
        except (json.JSONDecodeError, StructureLoadError) as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        snapshot_id = monitor.set_structure(structure)
        return {"snapshot_id": snapshot_id}

    @app.post("/api/events")
    async def post_events(request: Request):
        body = (await request.body()).decode("utf-8", errors="replace")
        return monitor.ingest_lines(body)

    @app.get("/api/overview")
    def overview():
        return monitor.overview()

    @app.get("/api/groups/{group_id}/scene")
    def group_scene(group_id: str):
        return monitor.group_scene(group_id).to_dict()

    @app.get("/api/forms/{form_id}/requests/{request_id}/scene")
    def form_scene(form_id: str, request_id: str):
        return monitor.form_scene(form_id, request_id).to_dict()

    @app.get("/api/forms/{form_id}/requests/{request_id}/controls/{order_index}/scene")
    def control_scene(form_id: str, request_id: str, order_index: int):
        return monitor.control_scene(form_id, request_id, order_index).to_dict()

    @app.get("/api/stream")
    def stream():
        subscription = monitor.subscribe()

        def event_source():
            try:
                yield ": formwatch verdict stream\n\n"
                while True:
                    try:
                        envelope = subscription.get(timeout=keepalive_seconds)
                    except queue.Empty:
                        yield ": keep-alive\n\n"
                        continue
                    if envelope is None:
                        break
                    payload = json.dumps(envelope, separators=(",", ":"))
                    yield f"id: {envelope['seq']}\nevent: verdict\ndata: {payload}\n\n"
            finally:
                subscription.close()

        return StreamingResponse(
            event_source(),
            media_type="text/event-stream",
            headers={"Cache-Control": "no-cache", "X-Accel-Buffering": "no"},
        )

    return app
