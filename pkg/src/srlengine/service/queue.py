"""Bounded in-memory FIFO between the ingest path and the batch writer.

Capacity is counted in events, not batches. Producers never block: a full
queue is reported as backpressure so the client can retry later. The writer
drains in flush-policy batches (max events or max interval, whichever first).
"""

from __future__ import annotations

import threading
import time
from collections import deque
from dataclasses import dataclass, field

from ..model import RawTraceEvent


@dataclass(frozen=True)
class QueuedBatch:
    session_id: str
    client_sequence: int | None
    events: tuple[RawTraceEvent, ...]


@dataclass
class BoundedEventQueue:
    capacity: int = 50_000
    _dq: deque = field(default_factory=deque)
    _cv: threading.Condition = field(default_factory=threading.Condition)
    _events: int = 0
    _unfinished: int = 0
    _closed: bool = False

    def try_put(self, batch: QueuedBatch) -> bool:
        """Enqueue, or report backpressure (False) when capacity is exceeded."""
        with self._cv:
            if self._closed:
                raise RuntimeError("queue closed")
            if self._dq and self._events + len(batch.events) > self.capacity:
                return False
            self._dq.append(batch)
            self._events += len(batch.events)
            self._unfinished += 1
            self._cv.notify_all()
            return True

    def get_batch(self, max_events: int, max_interval_ms: int) -> list[QueuedBatch]:
        """Collect batches per the flush policy; empty list means shut down."""
        with self._cv:
            while not self._dq:
                if self._closed:
                    return []
                self._cv.wait(0.05)
            deadline = time.monotonic() + max_interval_ms / 1000.0
            items: list[QueuedBatch] = []
            count = 0
            while True:
                while self._dq and count < max_events:
                    batch = self._dq.popleft()
                    items.append(batch)
                    count += len(batch.events)
                    self._events -= len(batch.events)
                now = time.monotonic()
                if count >= max_events or now >= deadline or self._closed:
                    return items
                self._cv.wait(min(0.02, deadline - now))

    def task_done(self, n: int = 1) -> None:
        with self._cv:
            self._unfinished -= n
            if self._unfinished <= 0:
                self._cv.notify_all()

    def join(self) -> None:
        """Block until every enqueued batch has been fully processed."""
        with self._cv:
            while self._unfinished > 0:
                self._cv.wait(0.02)

    def close(self) -> None:
        with self._cv:
            self._closed = True
            self._cv.notify_all()

    @property
    def depth(self) -> int:
        with self._cv:
            return self._events
