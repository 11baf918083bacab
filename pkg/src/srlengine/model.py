"""Shared domain vocabulary: raw events, page classification, session state.

Everything downstream (labelling, parsing, scaffolding, the service) speaks in
terms of these types. Timestamps are milliseconds relative to session start.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

# Closed set of wire-level event kinds.
EVENT_KINDS = frozenset({
    "keystroke",
    "mouse_click",
    "mouse_move",
    "scroll",
    "navigation",
    "tool_open",
    "tool_close",
    "annotation_create",
    "annotation_edit",
    "annotation_delete",
    "annotation_read",
    "annotation_label",
    "annotation_search",
    "content_search",
    "timer_check",
    "planner_interact",
    "essay_keystroke",
    "scaffold_interact",
})

# Closed set of scaffold popup / to-do list sub-actions.
SCAFFOLD_SUB_ACTIONS = (
    "Message_Triggered",
    "Message_Displayed",
    "Notification_Clicked",
    "Message_Closed",
    "MessageOption_Checked",
    "MessageOption_UnChecked",
    "CreateChecklist",
    "CurrToDoList_Displayed",
    "PrevToDoList_Displayed",
    "CurrToDoList_Edit",
    "PrevToDoList_Edit",
    "ToDoList_Closed",
    "CurrToDoListItem_Checked",
    "CurrToDoListItem_UnChecked",
    "PrevToDoListItem_Checked",
    "PrevToDoListItem_UnChecked",
    "CurrToDoList_Re-Ordered",
    "PrevToDoList_Re-Ordered",
    "PrevToDoListItem_ClickedLink",
    "NextToDoListItem_ClickedLink",
)
SCAFFOLD_SUB_ACTION_SET = frozenset(SCAFFOLD_SUB_ACTIONS)

PAGE_CLASSES = (
    "GENERAL_INSTRUCTION",
    "RUBRIC",
    "RELEVANT_CONTENT",
    "IRRELEVANT_CONTENT",
    "TABLE_OF_CONTENTS",
)

CONDITIONS = ("generalised", "personalised", "control")


class ValidationError(ValueError):
    """A document or event violated a schema or invariant.

    ``field`` names the offending field where one can be singled out.
    """

    def __init__(self, message: str, *, field: str | None = None):
        super().__init__(message)
        self.field = field


@dataclass(frozen=True)
class RawTraceEvent:
    """One timestamped browser interaction as received on the wire."""

    event_id: str
    session_id: str
    user_id: str
    timestamp: int  # ms since session start
    event_kind: str
    page_url: str = ""
    payload: dict[str, Any] = field(default_factory=dict)

    def validate(self) -> None:
        if self.timestamp < 0:
            raise ValidationError("timestamp must be >= 0", field="timestamp")
        if self.event_kind not in EVENT_KINDS:
            raise ValidationError(
                f"unknown event_kind {self.event_kind!r}", field="event_kind"
            )
        if self.event_kind == "scaffold_interact":
            sub = self.payload.get("sub_action")
            if sub not in SCAFFOLD_SUB_ACTION_SET:
                raise ValidationError(
                    f"unknown scaffold sub-action {sub!r}", field="payload.sub_action"
                )

    def to_wire(self) -> dict[str, Any]:
        return {
            "event_id": self.event_id,
            "session_id": self.session_id,
            "user_id": self.user_id,
            "timestamp": self.timestamp,
            "event_kind": self.event_kind,
            "page_url": self.page_url,
            "payload": dict(self.payload),
        }

    @classmethod
    def from_wire(cls, doc: dict[str, Any]) -> "RawTraceEvent":
        try:
            event = cls(
                event_id=str(doc["event_id"]),
                session_id=str(doc["session_id"]),
                user_id=str(doc["user_id"]),
                timestamp=int(doc["timestamp"]),
                event_kind=str(doc["event_kind"]),
                page_url=str(doc.get("page_url", "")),
                payload=dict(doc.get("payload") or {}),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed event document: {exc}") from exc
        event.validate()
        return event


@dataclass(frozen=True)
class PageCatalog:
    """Maps URL prefixes to page classes; unmatched URLs take the default.

    Longest matching prefix wins; equal-length collisions are rejected at
    construction so classification is deterministic.
    """

    entries: tuple[tuple[str, str], ...]  # (url_prefix, page_class)
    default_class: str = "IRRELEVANT_CONTENT"

    def __post_init__(self) -> None:
        if self.default_class not in PAGE_CLASSES:
            raise ValidationError(
                f"unknown page class {self.default_class!r}",
                field="page_catalog.default_class",
            )
        seen: set[str] = set()
        for prefix, page_class in self.entries:
            if page_class not in PAGE_CLASSES:
                raise ValidationError(
                    f"unknown page class {page_class!r} for prefix {prefix!r}",
                    field="page_catalog.entries",
                )
            if prefix in seen:
                raise ValidationError(
                    f"duplicate URL prefix {prefix!r}", field="page_catalog.entries"
                )
            seen.add(prefix)

    def classify(self, url: str) -> str:
        best: tuple[int, str] | None = None
        for prefix, page_class in self.entries:
            if url.startswith(prefix):
                if best is None or len(prefix) > best[0]:
                    best = (len(prefix), page_class)
        return best[1] if best else self.default_class

    def to_document(self) -> dict[str, Any]:
        return {
            "entries": [
                {"prefix": prefix, "page_class": page_class}
                for prefix, page_class in self.entries
            ],
            "default_class": self.default_class,
        }

    @classmethod
    def from_document(cls, doc: dict[str, Any]) -> "PageCatalog":
        entries = tuple(
            (str(entry["prefix"]), str(entry["page_class"]))
            for entry in doc.get("entries", [])
        )
        return cls(entries=entries, default_class=str(doc.get("default_class", "IRRELEVANT_CONTENT")))


def classify_page(url: str, catalog: PageCatalog) -> str:
    """Total, deterministic page classification."""
    return catalog.classify(url)


@dataclass
class SessionState:
    """Mutable per-session bookkeeping; exactly one writer at a time."""

    session_id: str
    user_id: str
    condition: str = "control"
    started_at: float = 0.0  # wall-clock seconds, informational
    elapsed: int = 0  # ms, monotone
    pages_visited: dict[str, int] = field(default_factory=dict)  # url -> first-visit ms
    detected_processes: list = field(default_factory=list)  # ProcessEvent list
    scaffolds_delivered: list = field(default_factory=list)  # ScaffoldDelivery list

    def advance(self, elapsed_ms: int) -> None:
        if elapsed_ms > self.elapsed:
            self.elapsed = elapsed_ms

    def record_visit(self, url: str, timestamp: int) -> bool:
        """Record a page visit; returns True when this is the first visit."""
        if url in self.pages_visited:
            return False
        self.pages_visited[url] = timestamp
        return True
