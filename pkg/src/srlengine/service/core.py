"""Service orchestration: ingest, per-session pipelines, scaffolds, portal.

Accepted batches are journalled synchronously (the acknowledgement point),
then a single writer thread moves them into the event table and feeds each
session's pipeline; scaffold evaluation serialises with pipeline updates via
per-session locks. On restart the journal is replayed and session pipelines
are rebuilt lazily from the persisted raw events, which is safe because the
pipeline is deterministic.
"""

from __future__ import annotations

import csv
import io
import json
import threading
from dataclasses import dataclass, field, replace
from typing import Any

from ..config import StudyConfig
from ..model import RawTraceEvent, ValidationError
from ..pipeline import SessionPipeline
from ..processes import compile_rules
from ..scaffolds import (
    Interaction,
    ResponseOption,
    ScaffoldDelivery,
    ScaffoldingEngine,
    ScaffoldRequest,
    ScaffoldResponse,
    ToDoItem,
    ToDoList,
)
from .queue import BoundedEventQueue, QueuedBatch
from .store import EventStore, _dumps


@dataclass
class IngestResult:
    accepted_count: int
    rejected: list[dict[str, Any]] = field(default_factory=list)
    duplicate: bool = False
    backpressure: bool = False
    retry_after_ms: int | None = None

    def to_wire(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "accepted_count": self.accepted_count,
            "rejected": self.rejected,
            "duplicate": self.duplicate,
        }
        if self.backpressure:
            doc["backpressure"] = True
            doc["retry_after_ms"] = self.retry_after_ms
        return doc


@dataclass
class ExportArtifact:
    text: str
    kind: str
    format: str
    count: int
    skipped: list[str] = field(default_factory=list)


_CSV_FIELDS = {
    "raw": ["event_id", "session_id", "user_id", "timestamp", "event_kind",
            "page_url", "payload"],
    "action": ["action_id", "session_id", "label", "sub_action", "start", "end",
               "source_event_ids", "page_class"],
    "process": ["session_id", "label", "rule_id", "start", "end",
                "matched_action_ids"],
}


class ServiceCore:
    def __init__(self, config: StudyConfig, db_path, queue_capacity: int = 50_000,
                 start_writer: bool = True):
        self.config = config
        self.store = EventStore(db_path)
        self.rules = compile_rules(config)
        self.queue = BoundedEventQueue(capacity=queue_capacity)
        self.engine = ScaffoldingEngine(config, event_sink=self._sink)
        self._pipelines: dict[str, SessionPipeline] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._locks_guard = threading.Lock()
        self._producer_lock = threading.Lock()
        self._flush_events, self._flush_interval_ms = config.batch_flush
        self._recover()
        self._writer: threading.Thread | None = None
        if start_writer:
            self._writer = threading.Thread(target=self._writer_loop, daemon=True)
            self._writer.start()

    # lifecycle

    def _recover(self) -> None:
        """Replay journalled batches that never reached the event table."""
        for session_id, sequence, events in self.store.pending_journal():
            self._apply_batch(QueuedBatch(session_id, sequence, tuple(events)))

    def drain(self) -> None:
        """Block until every accepted batch is persisted and parsed."""
        self.queue.join()

    def finalize_session(self, session_id: str, session_end: int | None = None) -> None:
        """Flush trailing labeller/parser state for one session."""
        with self._session_lock(session_id):
            pipeline = self._pipeline(session_id)
            a0, p0 = len(pipeline.actions), len(pipeline.processes)
            pipeline.finish(session_end)
            self._persist_delta(pipeline, a0, p0)

    def close(self, finalize: bool = False) -> None:
        self.drain()
        self.queue.close()
        if self._writer is not None:
            self._writer.join(timeout=5)
        if finalize:
            for session_id in list(self._pipelines):
                self.finalize_session(session_id)
        self.store.close()

    # ingest

    def ingest(self, batch_doc: dict[str, Any]) -> IngestResult:
        try:
            session_id = str(batch_doc["session_id"])
            client_sequence = int(batch_doc["client_sequence"])
            raw_events = batch_doc["events"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed ingest batch: {exc}")
        if not isinstance(raw_events, list):
            raise ValidationError("events must be a list", field="events")

        accepted: list[RawTraceEvent] = []
        rejected: list[dict[str, Any]] = []
        prev_ts: int | None = None
        for doc in raw_events:
            try:
                event = RawTraceEvent.from_wire(doc)
                if event.session_id != session_id:
                    raise ValidationError("event session_id differs from batch",
                                          field="session_id")
                if prev_ts is not None and event.timestamp < prev_ts:
                    raise ValidationError("events out of order within batch",
                                          field="timestamp")
            except ValidationError as exc:
                rejected.append({
                    "event_id": str(doc.get("event_id", "?")) if isinstance(doc, dict) else "?",
                    "reason": str(exc),
                })
                continue
            prev_ts = event.timestamp
            accepted.append(event)

        with self._producer_lock:
            if self.store.batch_seen(session_id, client_sequence):
                return IngestResult(accepted_count=0, duplicate=True)
            depth = self.queue.depth
            if depth > 0 and depth + len(accepted) > self.queue.capacity:
                return IngestResult(
                    accepted_count=0,
                    rejected=rejected,
                    backpressure=True,
                    retry_after_ms=self._flush_interval_ms,
                )
            if accepted:
                user_id = accepted[0].user_id
                self.store.upsert_session(session_id, user_id)
            if not self.store.journal_batch(session_id, client_sequence, accepted):
                return IngestResult(accepted_count=0, duplicate=True)
            if accepted:
                self.queue.try_put(
                    QueuedBatch(session_id, client_sequence, tuple(accepted))
                )
            else:
                # Nothing to move: clear the journal entry immediately.
                self.store.persist_events(session_id, client_sequence, [])
        return IngestResult(accepted_count=len(accepted), rejected=rejected)

    def ingest_export(self, text: str, fmt: str = "jsonl",
                      batch_size: int = 500) -> int:
        """Re-ingest a raw export artifact; returns accepted event count."""
        rows = _parse_rows(text, fmt)
        sequences: dict[str, int] = {}
        pending: dict[str, list[dict[str, Any]]] = {}
        total = 0

        def flush(session_id: str) -> int:
            events = pending.pop(session_id, [])
            if not events:
                return 0
            sequences[session_id] = sequences.get(session_id, 0) + 1
            result = self.ingest({
                "session_id": session_id,
                "client_sequence": sequences[session_id],
                "events": events,
            })
            return result.accepted_count

        for row in rows:
            session_id = str(row["session_id"])
            bucket = pending.setdefault(session_id, [])
            bucket.append(row)
            if len(bucket) >= batch_size:
                total += flush(session_id)
        for session_id in list(pending):
            total += flush(session_id)
        return total

    # writer side

    def _writer_loop(self) -> None:
        while True:
            items = self.queue.get_batch(self._flush_events, self._flush_interval_ms)
            if not items:
                return
            for item in items:
                self._apply_batch(item)
                self.queue.task_done()

    def _apply_batch(self, item: QueuedBatch) -> None:
        with self._session_lock(item.session_id):
            pipeline = self._pipeline(item.session_id,
                                      user_id=item.events[0].user_id if item.events else "")
            self.store.persist_events(item.session_id, item.client_sequence, item.events)
            a0, p0 = len(pipeline.actions), len(pipeline.processes)
            for event in item.events:
                pipeline.feed(event)
            self._persist_delta(pipeline, a0, p0)

    def _persist_delta(self, pipeline: SessionPipeline, a0: int, p0: int) -> None:
        if len(pipeline.actions) > a0 or len(pipeline.processes) > p0:
            self.store.persist_derived(
                pipeline.state.session_id,
                pipeline.actions[a0:], a0,
                pipeline.processes[p0:], p0,
            )

    # session plumbing

    def _session_lock(self, session_id: str) -> threading.Lock:
        with self._locks_guard:
            return self._locks.setdefault(session_id, threading.Lock())

    def _pipeline(self, session_id: str, user_id: str = "") -> SessionPipeline:
        pipeline = self._pipelines.get(session_id)
        if pipeline is not None:
            return pipeline
        row = self.store.session_row(session_id)
        if not user_id and row is not None:
            user_id = row["user_id"]
        pipeline = SessionPipeline(self.config, session_id, user_id, rules=self.rules)
        if row is not None:
            pipeline.state.condition = row["condition"]
        replayed = self.store.events_for_session(session_id)
        for event in replayed:
            pipeline.feed(event)
        if replayed:
            self._persist_delta(pipeline, 0, 0)
        for drow in self.store.deliveries_for_session(session_id):
            response = _response_from_wire(json.loads(drow["response_json"]))
            self.engine.restore_delivery(
                pipeline.state,
                ScaffoldDelivery(
                    scaffold_id=drow["scaffold_id"],
                    elapsed=drow["elapsed"],
                    outcome=drow["outcome"],
                    response=response,
                ),
            )
        for trow in self.store.todos_for_session(session_id):
            self.engine.restore_todo(_todo_from_wire(json.loads(trow["todo_json"])))
        self._pipelines[session_id] = pipeline
        return pipeline

    def _sink(self, event: RawTraceEvent) -> None:
        """Scaffold trace events join the session's stream like any other."""
        pipeline = self._pipelines[event.session_id]
        event = replace(event, timestamp=max(event.timestamp, pipeline.last_timestamp))
        self.store.persist_events(event.session_id, None, [event])
        a0, p0 = len(pipeline.actions), len(pipeline.processes)
        pipeline.feed(event)
        self._persist_delta(pipeline, a0, p0)

    # scaffold protocol

    def scaffold_request(self, user_id: str, session_id: str, condition: str,
                         elapsed_ms: int) -> ScaffoldResponse | None:
        request = ScaffoldRequest(user_id=user_id, session_id=session_id,
                                  condition=condition, elapsed=elapsed_ms)
        request.validate()
        self.store.upsert_session(session_id, user_id, condition=condition)
        with self._session_lock(session_id):
            pipeline = self._pipeline(session_id, user_id)
            pipeline.state.condition = condition
            before = len(pipeline.state.scaffolds_delivered)
            response = self.engine.evaluate_request(request, pipeline.state)
            if len(pipeline.state.scaffolds_delivered) > before:
                delivery = pipeline.state.scaffolds_delivered[-1]
                self.store.persist_delivery(
                    session_id, delivery.scaffold_id, delivery.elapsed,
                    delivery.outcome, delivery.response.to_wire(),
                )
            return response

    def scaffold_interaction(self, doc: dict[str, Any]) -> ToDoList | None:
        try:
            interaction = Interaction(
                session_id=str(doc["session_id"]),
                user_id=str(doc.get("user_id", "")),
                sub_action=str(doc["sub_action"]),
                elapsed=int(doc.get("elapsed_ms", 0)),
                option_id=doc.get("option_id"),
                order=tuple(doc["order"]) if doc.get("order") else None,
                scaffold_id=int(doc["scaffold_id"]) if doc.get("scaffold_id") is not None else None,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed interaction: {exc}")
        with self._session_lock(interaction.session_id):
            pipeline = self._pipeline(interaction.session_id, interaction.user_id)
            todo = self.engine.record_interaction(interaction, pipeline.state)
            if todo is not None:
                self.store.persist_todo(todo.session_id, todo.scaffold_id, todo.to_wire())
            return todo

    # log portal

    def query_logs(self, participant_id: str | None = None,
                   keyword: str | None = None, kind: str = "raw",
                   limit: int = 100, cursor: str | None = None) -> dict[str, Any]:
        if kind not in ("raw", "action", "process"):
            raise ValidationError(f"unknown log kind {kind!r}", field="kind")
        offset = int(cursor) if cursor else 0
        records, total = self.store.query(kind, participant_id, keyword, limit, offset)
        next_cursor = str(offset + limit) if offset + limit < total else None
        return {
            "kind": kind,
            "records": records,
            "total": total,
            "next_cursor": next_cursor,
        }

    def export_logs(self, session_ids: list[str] | None = None, kind: str = "raw",
                    fmt: str = "jsonl") -> ExportArtifact:
        if kind not in ("raw", "action", "process"):
            raise ValidationError(f"unknown log kind {kind!r}", field="kind")
        if fmt not in ("jsonl", "csv"):
            raise ValidationError(f"unknown export format {fmt!r}", field="format")
        skipped: list[str] = []
        scope: list[str] | None = None
        if session_ids is not None:
            known = set(self.store.session_ids())
            scope = [s for s in session_ids if s in known]
            skipped = [s for s in session_ids if s not in known]
        rows = self.store.export_rows(kind, scope)
        if fmt == "jsonl":
            text = "".join(_dumps(row) + "\n" for row in rows)
        else:
            fields = _CSV_FIELDS[kind]
            out = io.StringIO()
            writer = csv.writer(out, lineterminator="\n")
            writer.writerow(fields)
            for row in rows:
                writer.writerow([
                    _dumps(row[f]) if isinstance(row[f], (dict, list)) else row[f]
                    for f in fields
                ])
            text = out.getvalue()
        return ExportArtifact(text=text, kind=kind, format=fmt,
                              count=len(rows), skipped=skipped)

    def config_document(self) -> dict[str, Any]:
        return self.config.to_document()

    # test/ops conveniences

    def session_processes(self, session_id: str) -> list:
        with self._session_lock(session_id):
            return list(self._pipeline(session_id).processes)

    def session_actions(self, session_id: str) -> list:
        with self._session_lock(session_id):
            return list(self._pipeline(session_id).actions)


def _parse_rows(text: str, fmt: str) -> list[dict[str, Any]]:
    if fmt == "jsonl":
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    if fmt == "csv":
        reader = csv.DictReader(io.StringIO(text))
        rows = []
        for row in reader:
            doc = dict(row)
            if "payload" in doc:
                doc["payload"] = json.loads(doc["payload"]) if doc["payload"] else {}
            if "timestamp" in doc:
                doc["timestamp"] = int(doc["timestamp"])
            rows.append(doc)
        return rows
    raise ValidationError(f"unknown export format {fmt!r}", field="format")


def _response_from_wire(doc: dict[str, Any]) -> ScaffoldResponse:
    return ScaffoldResponse(
        scaffold_id=int(doc["scaffold_id"]),
        prompt_message=str(doc["message"]),
        options=tuple(
            ResponseOption(option_id=o["id"], text=o["text"], enabled=bool(o["enabled"]))
            for o in doc["options"]
        ),
        omitted=bool(doc["omitted"]),
    )


def _todo_from_wire(doc: dict[str, Any]) -> ToDoList:
    return ToDoList(
        session_id=str(doc["session_id"]),
        scaffold_id=int(doc["scaffold_id"]),
        items=[ToDoItem(option_id=i["option_id"], checked=bool(i["checked"]))
               for i in doc["items"]],
        created_at=int(doc.get("created_at", 0)),
    )
