"""Turns the raw event stream into labelled learning actions.

The labeller is a per-session streaming transform. Events are grouped into
page visits (maximal runs sharing a page URL); within a visit, tool events
interrupt the page-level run. The reading-versus-navigation decision needs
the dwell on the page, so records are released as soon as that verdict is
known: immediately on table-of-contents pages, once the dwell threshold has
passed elsewhere, and at departure for quick hops. Idle gaps become
synthesised OFF_TASK records in a second stage so the gap scan also covers
inactivity around tool usage.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable

from .model import (
    SCAFFOLD_SUB_ACTION_SET,
    RawTraceEvent,
    SessionState,
    ValidationError,
)

# Consecutive events with the same label merge into one record when the
# inter-event gap stays within this bound (keystroke bursts, repeated checks).
BURST_GAP_MS = 10_000


class ActionLabel(str, Enum):
    GENERAL_INSTRUCTION = "GENERAL_INSTRUCTION"
    RUBRIC = "RUBRIC"
    RELEVANT_READING = "RELEVANT_READING"
    RELEVANT_RE_READING = "RELEVANT_RE-READING"
    IRRELEVANT_READING = "IRRELEVANT_READING"
    IRRELEVANT_RE_READING = "IRRELEVANT_RE-READING"
    NAVIGATION = "NAVIGATION"
    OPEN_ESSAY = "OPEN_ESSAY"
    WRITE_ESSAY = "WRITE_ESSAY"
    EDIT_ANNOTATION = "EDIT_ANNOTATION"
    READ_ANNOTATION = "READ_ANNOTATION"
    LABEL_ANNOTATION = "LABEL_ANNOTATION"
    SEARCH_ANNOTATION = "SEARCH_ANNOTATION"
    TIMER = "TIMER"
    SEARCH_CONTENT = "SEARCH_CONTENT"
    PLANNER = "PLANNER"
    OFF_TASK = "OFF_TASK"
    SCAFFOLDING = "SCAFFOLDING"


ACTION_LABELS = frozenset(label.value for label in ActionLabel)

# Direct event-kind to action-label mappings (no dwell logic involved).
_DIRECT_KIND_LABELS = {
    "annotation_create": ActionLabel.EDIT_ANNOTATION,
    "annotation_edit": ActionLabel.EDIT_ANNOTATION,
    "annotation_delete": ActionLabel.EDIT_ANNOTATION,
    "annotation_read": ActionLabel.READ_ANNOTATION,
    "annotation_label": ActionLabel.LABEL_ANNOTATION,
    "annotation_search": ActionLabel.SEARCH_ANNOTATION,
    "content_search": ActionLabel.SEARCH_CONTENT,
    "timer_check": ActionLabel.TIMER,
    "planner_interact": ActionLabel.PLANNER,
    "essay_keystroke": ActionLabel.WRITE_ESSAY,
}

# tool_open / tool_close events labelled by the tool they touch.
_TOOL_LABELS = {
    "timer": ActionLabel.TIMER,
    "planner": ActionLabel.PLANNER,
    "annotation_search": ActionLabel.SEARCH_ANNOTATION,
    "search": ActionLabel.SEARCH_ANNOTATION,
    "writing": ActionLabel.OPEN_ESSAY,
    "essay": ActionLabel.OPEN_ESSAY,
}

# Events that count as being on the page rather than in a tool.
_PAGE_KINDS = frozenset({"navigation", "scroll", "mouse_click", "keystroke"})


@dataclass(frozen=True)
class ActionRecord:
    """A labelled learning action with its time span and source events."""

    action_id: str
    session_id: str
    label: ActionLabel
    start: int
    end: int
    source_event_ids: tuple[str, ...] = ()
    sub_action: str | None = None
    page_class: str | None = None

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValidationError("action start after end", field="start")

    @property
    def dwell_ms(self) -> int:
        return self.end - self.start

    def to_wire(self) -> dict[str, Any]:
        return {
            "action_id": self.action_id,
            "session_id": self.session_id,
            "label": self.label.value,
            "sub_action": self.sub_action,
            "start": self.start,
            "end": self.end,
            "source_event_ids": list(self.source_event_ids),
            "page_class": self.page_class,
        }

    @classmethod
    def from_wire(cls, doc: dict[str, Any]) -> "ActionRecord":
        return cls(
            action_id=str(doc["action_id"]),
            session_id=str(doc["session_id"]),
            label=ActionLabel(doc["label"]),
            start=int(doc["start"]),
            end=int(doc["end"]),
            source_event_ids=tuple(doc.get("source_event_ids") or ()),
            sub_action=doc.get("sub_action"),
            page_class=doc.get("page_class"),
        )


def label_scaffold_interaction(event: RawTraceEvent) -> ActionRecord:
    """One scaffold popup / to-do list interaction as a SCAFFOLDING action."""
    if event.event_kind != "scaffold_interact":
        raise ValidationError(
            f"expected scaffold_interact, got {event.event_kind!r}",
            field="event_kind",
        )
    sub = event.payload.get("sub_action")
    if sub not in SCAFFOLD_SUB_ACTION_SET:
        raise ValidationError(
            f"unknown scaffold sub-action {sub!r}", field="payload.sub_action"
        )
    return ActionRecord(
        action_id=f"{event.session_id}:{event.event_id}",
        session_id=event.session_id,
        label=ActionLabel.SCAFFOLDING,
        sub_action=sub,
        start=event.timestamp,
        end=event.timestamp,
        source_event_ids=(event.event_id,),
    )


@dataclass
class _Run:
    """A maximal burst of events sharing one label key within a visit."""

    key: tuple[str, str | None]  # ("page", None) or (label value, sub_action)
    start: int
    end: int
    event_ids: list[str] = field(default_factory=list)


class ActionLabeler:
    """Streaming event-to-action transform for one session.

    feed() returns the records finalised by the new event (possibly none);
    finish() flushes the trailing open visit. Noise events (bare mouse
    movement, unrecognised tools) are dropped from labelling; out-of-order
    events are rejected into ``rejected`` and the stream continues.
    """

    def __init__(self, config, state: SessionState):
        self._config = config
        self._state = state
        self._dwell_threshold_ms = config.instruction_dwell_threshold * 1000
        self._idle_ms = config.off_task_threshold * 1000
        self._counter = 0
        self._last_ts: int | None = None
        self.rejected: list[tuple[RawTraceEvent, str]] = []
        # Current page visit.
        self._visit_url: str | None = None
        self._visit_class: str | None = None
        self._visit_first: bool = False
        self._visit_entry: int = 0
        self._runs: list[_Run] = []

    def feed(self, event: RawTraceEvent) -> list[ActionRecord]:
        if self._last_ts is not None and event.timestamp < self._last_ts:
            self.rejected.append(
                (event, f"out-of-order timestamp {event.timestamp} < {self._last_ts}")
            )
            return []
        self._last_ts = event.timestamp
        self._state.advance(event.timestamp)

        out: list[ActionRecord] = []
        url = event.page_url or self._visit_url or ""
        if self._visit_url is None or url != self._visit_url:
            out.extend(self._close_visit(departure=event.timestamp))
            self._open_visit(url, event.timestamp)

        key = self._label_key(event)
        if key is None:  # noise
            return out

        # Quiet time on a page still counts as being on the page until it
        # reaches the idle threshold; tool bursts break at the burst gap.
        merge_gap = self._idle_ms - 1 if key[0] == "page" else BURST_GAP_MS
        run = self._runs[-1] if self._runs else None
        if (
            run is not None
            and run.key == key
            and event.timestamp - run.end <= merge_gap
        ):
            run.end = event.timestamp
            run.event_ids.append(event.event_id)
        else:
            self._runs.append(
                _Run(
                    key=key,
                    start=event.timestamp,
                    end=event.timestamp,
                    event_ids=[event.event_id],
                )
            )
        out.extend(self._flush_settled())
        return out

    def finish(self) -> list[ActionRecord]:
        """Flush the open visit; the labeller stays usable for more events."""
        records = self._close_visit(departure=None)
        self._visit_url = None
        return records

    # internal

    def _label_key(self, event: RawTraceEvent) -> tuple[str, str | None] | None:
        kind = event.event_kind
        if kind == "mouse_move":
            return None
        if kind in _PAGE_KINDS:
            return ("page", None)
        if kind in _DIRECT_KIND_LABELS:
            return (_DIRECT_KIND_LABELS[kind].value, None)
        if kind == "scaffold_interact":
            sub = event.payload.get("sub_action")
            if sub not in SCAFFOLD_SUB_ACTION_SET:
                self.rejected.append((event, f"unknown scaffold sub-action {sub!r}"))
                return None
            return (ActionLabel.SCAFFOLDING.value, sub)
        if kind in ("tool_open", "tool_close"):
            label = _TOOL_LABELS.get(str(event.payload.get("tool", "")).lower())
            if label is None:
                return None
            return (label.value, None)
        return None

    def _open_visit(self, url: str, entry: int) -> None:
        self._visit_url = url
        self._visit_class = self._config.page_catalog.classify(url)
        self._visit_first = self._state.record_visit(url, entry)
        self._visit_entry = entry
        self._runs = []

    def _page_label(self, dwell: int) -> ActionLabel:
        if self._visit_class == "TABLE_OF_CONTENTS":
            return ActionLabel.NAVIGATION
        if dwell < self._dwell_threshold_ms:
            return ActionLabel.NAVIGATION
        if self._visit_class == "GENERAL_INSTRUCTION":
            return ActionLabel.GENERAL_INSTRUCTION
        if self._visit_class == "RUBRIC":
            return ActionLabel.RUBRIC
        if self._visit_class == "RELEVANT_CONTENT":
            return (
                ActionLabel.RELEVANT_READING
                if self._visit_first
                else ActionLabel.RELEVANT_RE_READING
            )
        return (
            ActionLabel.IRRELEVANT_READING
            if self._visit_first
            else ActionLabel.IRRELEVANT_RE_READING
        )

    def _emit_run(self, run: _Run, page_label: ActionLabel,
                  following: int | None) -> ActionRecord:
        if run.key[0] == "page":
            label = page_label
            sub = None
            # A page run lasts until the next activity or the departure,
            # unless the silence reaches the idle threshold: such stretches
            # must stay visible to the OFF_TASK scan.
            if following is None or following - run.end >= self._idle_ms:
                end = run.end
            else:
                end = following
        else:
            label = ActionLabel(run.key[0])
            sub = run.key[1]
            end = run.end
        self._counter += 1
        return ActionRecord(
            action_id=f"{self._state.session_id}:a{self._counter}",
            session_id=self._state.session_id,
            label=label,
            sub_action=sub,
            start=run.start,
            end=max(end, run.end),
            source_event_ids=tuple(run.event_ids),
            page_class=self._visit_class,
        )

    def _flush_settled(self) -> list[ActionRecord]:
        """Emit finished runs once the visit's page label is determined.

        The label is known as soon as the dwell has reached the reading
        threshold (or immediately on a table-of-contents page); only the
        last run can still grow, so everything before it is final.
        """
        if len(self._runs) <= 1:
            return []
        if self._visit_class != "TABLE_OF_CONTENTS":
            if self._last_ts is None or (
                self._last_ts - self._visit_entry < self._dwell_threshold_ms
            ):
                return []
        page_label = self._page_label(dwell=self._dwell_threshold_ms)
        records: list[ActionRecord] = []
        while len(self._runs) > 1:
            run = self._runs.pop(0)
            records.append(self._emit_run(run, page_label, self._runs[0].start))
        return records

    def _close_visit(self, departure: int | None) -> list[ActionRecord]:
        if self._visit_url is None or not self._runs:
            return []
        last_end = max(run.end for run in self._runs)
        dwell = (departure if departure is not None else last_end) - self._visit_entry
        page_label = self._page_label(dwell)
        records: list[ActionRecord] = []
        for i, run in enumerate(self._runs):
            following = self._runs[i + 1].start if i + 1 < len(self._runs) else departure
            records.append(self._emit_run(run, page_label, following))
        self._runs = []
        return records


def label_events(
    events: Iterable[RawTraceEvent], state: SessionState, config
) -> list[ActionRecord]:
    """Batch convenience over ActionLabeler; see the class for semantics."""
    labeler = ActionLabeler(config, state)
    records: list[ActionRecord] = []
    for event in events:
        records.extend(labeler.feed(event))
    records.extend(labeler.finish())
    return records


class OffTaskDetector:
    """Inserts one OFF_TASK record per idle gap at or above the threshold."""

    def __init__(self, config, session_id: str, session_start: int = 0):
        self._threshold_ms = config.off_task_threshold * 1000
        self._session_id = session_id
        self._cursor = session_start
        self._counter = 0

    def _gap_record(self, start: int, end: int) -> ActionRecord:
        self._counter += 1
        return ActionRecord(
            action_id=f"{self._session_id}:g{self._counter}",
            session_id=self._session_id,
            label=ActionLabel.OFF_TASK,
            start=start,
            end=end,
            source_event_ids=(),
        )

    def feed(self, record: ActionRecord) -> list[ActionRecord]:
        out: list[ActionRecord] = []
        if record.start - self._cursor >= self._threshold_ms:
            out.append(self._gap_record(self._cursor, record.start))
        self._cursor = max(self._cursor, record.end)
        out.append(record)
        return out

    def finish(self, session_end: int | None = None) -> list[ActionRecord]:
        if session_end is None:
            return []
        if session_end - self._cursor >= self._threshold_ms:
            return [self._gap_record(self._cursor, session_end)]
        return []


def detect_off_task(
    actions: Iterable[ActionRecord],
    config,
    session_start: int = 0,
    session_end: int | None = None,
) -> list[ActionRecord]:
    """Batch OFF_TASK insertion over a time-ordered action stream."""
    records = list(actions)
    session_id = records[0].session_id if records else ""
    detector = OffTaskDetector(config, session_id, session_start)
    out: list[ActionRecord] = []
    for record in records:
        out.extend(detector.feed(record))
    out.extend(detector.finish(session_end))
    return out
