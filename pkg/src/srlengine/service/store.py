"""Embedded transactional store (SQLite, WAL).

Tables: sessions, ingest_journal (write-ahead of accepted batches), batches
(idempotency ledger), events, actions, processes, scaffold_deliveries,
todo_lists. Accepted batches are journalled synchronously on the ingest path
and moved to the events table by the asynchronous batch writer; recovery
replays whatever is still in the journal. One shared write connection guarded
by a lock; reads run on short-lived read-only connections.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from pathlib import Path
from typing import Any, Iterable

from ..actions import ActionRecord
from ..model import RawTraceEvent
from ..processes import ProcessEvent

_SCHEMA = """
CREATE TABLE IF NOT EXISTS sessions (
  session_id TEXT PRIMARY KEY,
  user_id TEXT NOT NULL,
  condition TEXT NOT NULL DEFAULT 'control',
  started_at REAL NOT NULL DEFAULT 0
);
CREATE TABLE IF NOT EXISTS ingest_journal (
  session_id TEXT NOT NULL,
  client_sequence INTEGER NOT NULL,
  events_json TEXT NOT NULL,
  PRIMARY KEY (session_id, client_sequence)
);
CREATE TABLE IF NOT EXISTS batches (
  session_id TEXT NOT NULL,
  client_sequence INTEGER NOT NULL,
  PRIMARY KEY (session_id, client_sequence)
);
CREATE TABLE IF NOT EXISTS events (
  rowid INTEGER PRIMARY KEY AUTOINCREMENT,
  session_id TEXT NOT NULL,
  event_id TEXT NOT NULL,
  user_id TEXT NOT NULL,
  timestamp INTEGER NOT NULL,
  event_kind TEXT NOT NULL,
  page_url TEXT NOT NULL,
  payload TEXT NOT NULL
);
CREATE INDEX IF NOT EXISTS idx_events_session ON events(session_id, rowid);
CREATE TABLE IF NOT EXISTS actions (
  session_id TEXT NOT NULL,
  action_id TEXT NOT NULL,
  seq INTEGER NOT NULL,
  label TEXT NOT NULL,
  sub_action TEXT,
  start INTEGER NOT NULL,
  end INTEGER NOT NULL,
  source_event_ids TEXT NOT NULL,
  page_class TEXT,
  PRIMARY KEY (session_id, action_id)
);
CREATE TABLE IF NOT EXISTS processes (
  session_id TEXT NOT NULL,
  seq INTEGER NOT NULL,
  label TEXT NOT NULL,
  rule_id TEXT NOT NULL,
  start INTEGER NOT NULL,
  end INTEGER NOT NULL,
  matched_action_ids TEXT NOT NULL,
  PRIMARY KEY (session_id, seq)
);
CREATE TABLE IF NOT EXISTS scaffold_deliveries (
  session_id TEXT NOT NULL,
  scaffold_id INTEGER NOT NULL,
  elapsed INTEGER NOT NULL,
  outcome TEXT NOT NULL,
  response_json TEXT NOT NULL,
  PRIMARY KEY (session_id, scaffold_id)
);
CREATE TABLE IF NOT EXISTS todo_lists (
  session_id TEXT NOT NULL,
  scaffold_id INTEGER NOT NULL,
  todo_json TEXT NOT NULL,
  PRIMARY KEY (session_id, scaffold_id)
);
"""


def _dumps(doc: Any) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


class EventStore:
    def __init__(self, path: str | Path):
        self.path = str(path)
        self._write = sqlite3.connect(self.path, check_same_thread=False)
        self._write.execute("PRAGMA journal_mode=WAL")
        self._write.execute("PRAGMA synchronous=NORMAL")
        self._write.executescript(_SCHEMA)
        self._write.commit()
        self._lock = threading.Lock()

    def close(self) -> None:
        with self._lock:
            self._write.commit()
            self._write.close()

    def _read_conn(self) -> sqlite3.Connection:
        conn = sqlite3.connect(self.path, check_same_thread=False)
        conn.row_factory = sqlite3.Row
        return conn

    # sessions

    def upsert_session(self, session_id: str, user_id: str,
                       condition: str | None = None) -> None:
        with self._lock:
            self._write.execute(
                "INSERT INTO sessions(session_id, user_id) VALUES(?, ?) "
                "ON CONFLICT(session_id) DO NOTHING",
                (session_id, user_id),
            )
            if condition is not None:
                self._write.execute(
                    "UPDATE sessions SET condition = ? WHERE session_id = ?",
                    (condition, session_id),
                )
            self._write.commit()

    def session_row(self, session_id: str) -> sqlite3.Row | None:
        with self._read_conn() as conn:
            return conn.execute(
                "SELECT * FROM sessions WHERE session_id = ?", (session_id,)
            ).fetchone()

    def session_ids(self) -> list[str]:
        with self._read_conn() as conn:
            rows = conn.execute(
                "SELECT session_id FROM sessions ORDER BY session_id"
            ).fetchall()
        return [r["session_id"] for r in rows]

    def session_user(self, session_id: str) -> str | None:
        row = self.session_row(session_id)
        return row["user_id"] if row else None

    # ingest journal / idempotency

    def batch_seen(self, session_id: str, client_sequence: int) -> bool:
        with self._read_conn() as conn:
            row = conn.execute(
                "SELECT 1 FROM batches WHERE session_id = ? AND client_sequence = ?",
                (session_id, client_sequence),
            ).fetchone()
        return row is not None

    def journal_batch(self, session_id: str, client_sequence: int,
                      events: list[RawTraceEvent]) -> bool:
        """Durably record an accepted batch; False when already seen."""
        payload = _dumps([e.to_wire() for e in events])
        with self._lock:
            try:
                self._write.execute(
                    "INSERT INTO batches(session_id, client_sequence) VALUES(?, ?)",
                    (session_id, client_sequence),
                )
            except sqlite3.IntegrityError:
                self._write.rollback()
                return False
            self._write.execute(
                "INSERT INTO ingest_journal(session_id, client_sequence, events_json) "
                "VALUES(?, ?, ?)",
                (session_id, client_sequence, payload),
            )
            self._write.commit()
            return True

    def pending_journal(self) -> list[tuple[str, int, list[RawTraceEvent]]]:
        with self._read_conn() as conn:
            rows = conn.execute(
                "SELECT session_id, client_sequence, events_json "
                "FROM ingest_journal ORDER BY rowid"
            ).fetchall()
        return [
            (
                r["session_id"],
                r["client_sequence"],
                [RawTraceEvent.from_wire(doc) for doc in json.loads(r["events_json"])],
            )
            for r in rows
        ]

    # event / derived persistence (writer thread)

    def persist_events(self, session_id: str, client_sequence: int | None,
                       events: Iterable[RawTraceEvent]) -> None:
        with self._lock:
            self._write.executemany(
                "INSERT INTO events(session_id, event_id, user_id, timestamp, "
                "event_kind, page_url, payload) VALUES(?, ?, ?, ?, ?, ?, ?)",
                [
                    (e.session_id, e.event_id, e.user_id, e.timestamp,
                     e.event_kind, e.page_url, _dumps(e.payload))
                    for e in events
                ],
            )
            if client_sequence is not None:
                self._write.execute(
                    "DELETE FROM ingest_journal "
                    "WHERE session_id = ? AND client_sequence = ?",
                    (session_id, client_sequence),
                )
            self._write.commit()

    def persist_derived(self, session_id: str, actions: Iterable[ActionRecord],
                        action_seq_start: int,
                        processes: Iterable[ProcessEvent],
                        process_seq_start: int) -> None:
        with self._lock:
            self._write.executemany(
                "INSERT OR REPLACE INTO actions(session_id, action_id, seq, label, "
                "sub_action, start, end, source_event_ids, page_class) "
                "VALUES(?, ?, ?, ?, ?, ?, ?, ?, ?)",
                [
                    (a.session_id, a.action_id, action_seq_start + i, a.label.value,
                     a.sub_action, a.start, a.end, _dumps(list(a.source_event_ids)),
                     a.page_class)
                    for i, a in enumerate(actions)
                ],
            )
            self._write.executemany(
                "INSERT OR REPLACE INTO processes(session_id, seq, label, rule_id, "
                "start, end, matched_action_ids) VALUES(?, ?, ?, ?, ?, ?, ?)",
                [
                    (p.session_id, process_seq_start + i, p.label.value, p.rule_id,
                     p.start, p.end, _dumps(list(p.matched_action_ids)))
                    for i, p in enumerate(processes)
                ],
            )
            self._write.commit()

    def persist_delivery(self, session_id: str, scaffold_id: int, elapsed: int,
                         outcome: str, response_doc: dict) -> None:
        with self._lock:
            self._write.execute(
                "INSERT OR REPLACE INTO scaffold_deliveries(session_id, scaffold_id, "
                "elapsed, outcome, response_json) VALUES(?, ?, ?, ?, ?)",
                (session_id, scaffold_id, elapsed, outcome, _dumps(response_doc)),
            )
            self._write.commit()

    def persist_todo(self, session_id: str, scaffold_id: int, todo_doc: dict) -> None:
        with self._lock:
            self._write.execute(
                "INSERT OR REPLACE INTO todo_lists(session_id, scaffold_id, todo_json) "
                "VALUES(?, ?, ?)",
                (session_id, scaffold_id, _dumps(todo_doc)),
            )
            self._write.commit()

    # reads

    def events_for_session(self, session_id: str) -> list[RawTraceEvent]:
        with self._read_conn() as conn:
            rows = conn.execute(
                "SELECT * FROM events WHERE session_id = ? ORDER BY rowid",
                (session_id,),
            ).fetchall()
        return [self._event_from_row(r) for r in rows]

    @staticmethod
    def _event_from_row(row: sqlite3.Row) -> RawTraceEvent:
        return RawTraceEvent(
            event_id=row["event_id"],
            session_id=row["session_id"],
            user_id=row["user_id"],
            timestamp=row["timestamp"],
            event_kind=row["event_kind"],
            page_url=row["page_url"],
            payload=json.loads(row["payload"]),
        )

    def deliveries_for_session(self, session_id: str) -> list[sqlite3.Row]:
        with self._read_conn() as conn:
            return conn.execute(
                "SELECT * FROM scaffold_deliveries WHERE session_id = ? "
                "ORDER BY elapsed",
                (session_id,),
            ).fetchall()

    def todos_for_session(self, session_id: str) -> list[sqlite3.Row]:
        with self._read_conn() as conn:
            return conn.execute(
                "SELECT * FROM todo_lists WHERE session_id = ?", (session_id,)
            ).fetchall()

    def count_events(self, session_id: str | None = None) -> int:
        with self._read_conn() as conn:
            if session_id is None:
                return conn.execute("SELECT COUNT(*) FROM events").fetchone()[0]
            return conn.execute(
                "SELECT COUNT(*) FROM events WHERE session_id = ?", (session_id,)
            ).fetchone()[0]

    def query(self, kind: str, participant_id: str | None, keyword: str | None,
              limit: int, offset: int) -> tuple[list[dict], int]:
        """Filtered records of one kind, newest first, with a total count."""
        table = {"raw": "events", "action": "actions", "process": "processes"}[kind]
        if kind == "raw":
            base = f"FROM {table} t"
            order = "t.rowid DESC"
        else:
            base = f"FROM {table} t JOIN sessions s ON s.session_id = t.session_id"
            order = "t.start DESC, t.seq DESC"
        clauses: list[str] = []
        params: list[Any] = []
        if participant_id is not None:
            clauses.append("t.user_id = ?" if kind == "raw" else "s.user_id = ?")
            params.append(participant_id)
        where = f" WHERE {' AND '.join(clauses)}" if clauses else ""
        with self._read_conn() as conn:
            rows = conn.execute(
                f"SELECT t.* {base}{where} ORDER BY {order}", params
            ).fetchall()
        records = []
        for row in rows:
            doc = self._row_doc(kind, row)
            if keyword is not None and keyword not in _dumps(doc):
                continue
            records.append(doc)
        total = len(records)
        return records[offset:offset + limit], total

    def _row_doc(self, kind: str, row: sqlite3.Row) -> dict:
        if kind == "raw":
            return self._event_from_row(row).to_wire()
        if kind == "action":
            return {
                "action_id": row["action_id"],
                "session_id": row["session_id"],
                "label": row["label"],
                "sub_action": row["sub_action"],
                "start": row["start"],
                "end": row["end"],
                "source_event_ids": json.loads(row["source_event_ids"]),
                "page_class": row["page_class"],
            }
        return {
            "session_id": row["session_id"],
            "label": row["label"],
            "rule_id": row["rule_id"],
            "start": row["start"],
            "end": row["end"],
            "matched_action_ids": json.loads(row["matched_action_ids"]),
        }

    def export_rows(self, kind: str, session_ids: list[str] | None) -> list[dict]:
        """Complete dump of one kind in deterministic (session, emission) order."""
        table = {"raw": "events", "action": "actions", "process": "processes"}[kind]
        order = "session_id, rowid" if kind == "raw" else "session_id, seq"
        with self._read_conn() as conn:
            if session_ids is None:
                rows = conn.execute(
                    f"SELECT * FROM {table} ORDER BY {order}"
                ).fetchall()
            else:
                marks = ",".join("?" for _ in session_ids)
                rows = conn.execute(
                    f"SELECT * FROM {table} WHERE session_id IN ({marks}) "
                    f"ORDER BY {order}",
                    session_ids,
                ).fetchall()
        return [self._row_doc(kind, r) for r in rows]
