"""Per-session composition: events -> actions -> OFF_TASK gaps -> processes."""

from __future__ import annotations

from typing import NamedTuple

from .actions import ActionLabeler, ActionRecord, OffTaskDetector
from .model import RawTraceEvent, SessionState
from .processes import CompiledRules, ProcessEvent, ProcessParser, compile_rules


class PipelineDelta(NamedTuple):
    actions: list[ActionRecord]
    processes: list[ProcessEvent]
    rejected: list[tuple[RawTraceEvent, str]]


class SessionPipeline:
    """Single-writer streaming pipeline for one session.

    feed() and finish() return only the newly finalised records; cumulative
    results live in ``actions`` / ``processes`` and detected process events
    are mirrored into ``state.detected_processes`` for scaffolding.
    """

    def __init__(self, config, session_id: str, user_id: str,
                 rules: CompiledRules | None = None):
        self.state = SessionState(session_id=session_id, user_id=user_id)
        self._labeler = ActionLabeler(config, self.state)
        self._gaps = OffTaskDetector(config, session_id)
        self._parser = ProcessParser(rules if rules is not None else compile_rules(config))
        self.actions: list[ActionRecord] = []
        self.processes: list[ProcessEvent] = []
        self.last_timestamp = 0
        self._finished = False

    def feed(self, event: RawTraceEvent) -> PipelineDelta:
        if self._finished:
            raise RuntimeError("pipeline already finalised")
        before = len(self._labeler.rejected)
        new_actions: list[ActionRecord] = []
        for record in self._labeler.feed(event):
            new_actions.extend(self._gaps.feed(record))
        new_processes: list[ProcessEvent] = []
        for record in new_actions:
            new_processes.extend(self._parser.feed(record))
        self.actions.extend(new_actions)
        self.processes.extend(new_processes)
        self.state.detected_processes.extend(new_processes)
        self.last_timestamp = max(self.last_timestamp, event.timestamp)
        return PipelineDelta(
            new_actions, new_processes, self._labeler.rejected[before:]
        )

    def finish(self, session_end: int | None = None) -> PipelineDelta:
        """Flush trailing state; call once, when the session is over."""
        if self._finished:
            return PipelineDelta([], [], [])
        self._finished = True
        new_actions: list[ActionRecord] = []
        for record in self._labeler.finish():
            new_actions.extend(self._gaps.feed(record))
        new_actions.extend(self._gaps.finish(session_end))
        new_processes: list[ProcessEvent] = []
        for record in new_actions:
            new_processes.extend(self._parser.feed(record))
        new_processes.extend(self._parser.finish())
        self.actions.extend(new_actions)
        self.processes.extend(new_processes)
        self.state.detected_processes.extend(new_processes)
        return PipelineDelta(new_actions, new_processes, [])


def run_offline(events, config, session_id: str | None = None,
                user_id: str = "", session_end: int | None = None) -> SessionPipeline:
    """Batch-parse a time-ordered event stream for one session."""
    events = list(events)
    if session_id is None:
        session_id = events[0].session_id if events else ""
    if not user_id and events:
        user_id = events[0].user_id
    pipeline = SessionPipeline(config, session_id, user_id)
    for event in events:
        pipeline.feed(event)
    pipeline.finish(session_end)
    return pipeline
