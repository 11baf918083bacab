"""Compiles pattern rules and matches action streams into SRL process events.

Matching is greedy left-to-right. At each unconsumed stream position the
highest-priority rule that matches there (ties: longer pattern, then rule id)
consumes its actions and emits one process event; positions no rule matches
are NO_PROCESS and silently excluded. Ordered rules ("->") need their
elements contiguous and in order; order-free rules ("<->") accept any
permutation inside a fixed window of consecutive actions, consuming the
earliest valid combination. OFF_TASK records never participate: they are
skipped, break contiguity, and truncate order-free windows.

The streaming parser commits each position as soon as its decision is
definite: a candidate match is emitted once every higher-priority candidate
is impossible on the buffered input, and a position is dropped as NO_PROCESS
once no rule can match it. Decisions depend only on stream content, never on
arrival chunking, so incremental and batch parsing produce identical output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from typing import Any, Iterable, NamedTuple

from .actions import ActionLabel, ActionRecord
from .model import ValidationError


class ProcessLabel(str, Enum):
    MC_ORIENTATION = "MC.Orientation"
    MC_PLANNING = "MC.Planning"
    MC_MONITORING = "MC.Monitoring"
    MC_EVALUATION = "MC.Evaluation"
    LC_FIRST_READING = "LC.First-reading"
    LC_RE_READING = "LC.Re-reading"
    HC_ELABORATION_ORGANISATION = "HC.Elaboration-Organisation"
    NO_PROCESS = "NO_PROCESS"


ORDERED = "ordered"
ORDER_FREE = "order_free"

# position-decision states for the streaming matcher
_MATCH, _IMPOSSIBLE, _UNKNOWN = 0, 1, 2


@dataclass(frozen=True)
class RuleGuard:
    """Extra constraint on every matched action carrying the guarded label."""

    element: ActionLabel
    min_dwell_ms: int | None = None
    page_class: str | None = None

    def admits(self, action: ActionRecord) -> bool:
        if action.label != self.element:
            return True
        if self.min_dwell_ms is not None and action.dwell_ms <= self.min_dwell_ms:
            return False
        if self.page_class is not None and action.page_class != self.page_class:
            return False
        return True

    def to_document(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"element": self.element.value}
        if self.min_dwell_ms is not None:
            doc["min_dwell_ms"] = self.min_dwell_ms
        if self.page_class is not None:
            doc["page_class"] = self.page_class
        return doc


@dataclass(frozen=True)
class PatternRule:
    rule_id: str
    label: ProcessLabel
    elements: tuple[ActionLabel, ...]
    ordering: str = ORDERED
    guards: tuple[RuleGuard, ...] = ()
    priority: int = 0

    def __post_init__(self) -> None:
        if not self.elements:
            raise ValidationError(
                f"rule {self.rule_id!r} has no elements", field="elements"
            )
        if self.ordering not in (ORDERED, ORDER_FREE):
            raise ValidationError(
                f"rule {self.rule_id!r} ordering must be ordered or order_free",
                field="ordering",
            )
        if self.label is ProcessLabel.NO_PROCESS:
            raise ValidationError(
                f"rule {self.rule_id!r} may not emit NO_PROCESS", field="label"
            )

    def admits(self, actions: Iterable[ActionRecord]) -> bool:
        return all(guard.admits(a) for a in actions for guard in self.guards)

    def to_document(self) -> dict[str, Any]:
        return {
            "rule_id": self.rule_id,
            "label": self.label.value,
            "elements": [e.value for e in self.elements],
            "ordering": self.ordering,
            "guards": [g.to_document() for g in self.guards],
            "priority": self.priority,
        }

    @classmethod
    def from_document(cls, doc: dict[str, Any]) -> "PatternRule":
        try:
            guards = tuple(
                RuleGuard(
                    element=ActionLabel(g["element"]),
                    min_dwell_ms=g.get("min_dwell_ms"),
                    page_class=g.get("page_class"),
                )
                for g in doc.get("guards", [])
            )
            return cls(
                rule_id=str(doc["rule_id"]),
                label=ProcessLabel(doc["label"]),
                elements=tuple(ActionLabel(e) for e in doc["elements"]),
                ordering=str(doc.get("ordering", ORDERED)),
                guards=guards,
                priority=int(doc.get("priority", 0)),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise ValidationError(f"malformed pattern rule: {exc}") from exc


@dataclass(frozen=True)
class ProcessEvent:
    session_id: str
    label: ProcessLabel
    rule_id: str
    start: int
    end: int
    matched_action_ids: tuple[str, ...]

    def to_wire(self) -> dict[str, Any]:
        return {
            "session_id": self.session_id,
            "label": self.label.value,
            "rule_id": self.rule_id,
            "start": self.start,
            "end": self.end,
            "matched_action_ids": list(self.matched_action_ids),
        }

    @classmethod
    def from_wire(cls, doc: dict[str, Any]) -> "ProcessEvent":
        return cls(
            session_id=str(doc["session_id"]),
            label=ProcessLabel(doc["label"]),
            rule_id=str(doc["rule_id"]),
            start=int(doc["start"]),
            end=int(doc["end"]),
            matched_action_ids=tuple(doc.get("matched_action_ids") or ()),
        )


class CompiledRules:
    """Rule set indexed by possible leading action label."""

    def __init__(self, rules: Iterable[PatternRule], window: int):
        self.rules = tuple(rules)
        self.window = window
        seen: set[str] = set()
        for rule in self.rules:
            if rule.rule_id in seen:
                raise ValidationError(
                    f"duplicate rule_id {rule.rule_id!r}", field="rule_id"
                )
            seen.add(rule.rule_id)
        self._by_leading: dict[ActionLabel, list[PatternRule]] = {}
        for rule in self.rules:
            leading = (
                {rule.elements[0]} if rule.ordering == ORDERED else set(rule.elements)
            )
            for label in leading:
                self._by_leading.setdefault(label, []).append(rule)
        # Ties at one stream position: priority, then longer pattern, then id.
        for candidates in self._by_leading.values():
            candidates.sort(key=lambda r: (-r.priority, -len(r.elements), r.rule_id))
        # Positions stay open until this many actions are buffered past them.
        self.lookahead = max(
            [window]
            + [len(r.elements) for r in self.rules if r.ordering == ORDERED]
        )

    def candidates(self, label: ActionLabel) -> list[PatternRule]:
        return self._by_leading.get(label, [])


def compile_rules(config) -> CompiledRules:
    """Validate and index config.pattern_rules for streaming matches."""
    return CompiledRules(config.pattern_rules, window=config.order_free_window)


class _Slot(NamedTuple):
    action: ActionRecord
    index: int


@dataclass
class ProcessParser:
    """Greedy streaming matcher for one session's action stream."""

    rules: CompiledRules
    _buffer: list[ActionRecord] = field(default_factory=list)
    _consumed: set[int] = field(default_factory=set)
    _base: int = 0  # stream index of _buffer[0]
    _next: int = 0  # next stream position to resolve

    def feed(self, action: ActionRecord) -> list[ProcessEvent]:
        self._buffer.append(action)
        return self._resolve(final=False)

    def finish(self) -> list[ProcessEvent]:
        events = self._resolve(final=True)
        self._base += len(self._buffer)
        self._next = self._base
        self._buffer.clear()
        self._consumed.clear()
        return events

    def _action_at(self, pos: int) -> ActionRecord:
        return self._buffer[pos - self._base]

    def _is_barrier(self, pos: int) -> bool:
        return self._action_at(pos).label == ActionLabel.OFF_TASK

    def _resolve(self, final: bool) -> list[ProcessEvent]:
        end = self._base + len(self._buffer)
        events: list[ProcessEvent] = []
        while self._next < end:
            pos = self._next
            if pos in self._consumed or self._is_barrier(pos):
                self._consumed.discard(pos)
                self._next += 1
                self._trim()
                continue
            decided, event = self._match_at(pos, end, final)
            if not decided:
                break  # more input could still change this position
            if event is not None:
                events.append(event)
            self._next += 1
            self._trim()
        return events

    def _trim(self) -> None:
        drop = self._next - self._base
        if drop > 2 * self.rules.lookahead:
            keep = self.rules.lookahead
            cut = drop - keep
            del self._buffer[:cut]
            self._base += cut

    def _match_at(self, pos: int, end: int, final: bool
                  ) -> tuple[bool, ProcessEvent | None]:
        """Decide position pos, or report it undecided.

        Candidates are tried best-ranked first; a match commits only once
        every higher-ranked candidate is definitely impossible, so chunked
        feeding picks the same rule as batch parsing.
        """
        action = self._action_at(pos)
        for rule in self.rules.candidates(action.label):
            status, positions = self._try_rule(rule, pos, end, final)
            if status == _UNKNOWN:
                return False, None
            if status == _MATCH:
                for p in positions:
                    if p != pos:
                        self._consumed.add(p)
                matched = [self._action_at(p) for p in positions]
                return True, ProcessEvent(
                    session_id=action.session_id,
                    label=rule.label,
                    rule_id=rule.rule_id,
                    start=min(a.start for a in matched),
                    end=max(a.end for a in matched),
                    matched_action_ids=tuple(a.action_id for a in matched),
                )
        return True, None  # NO_PROCESS: excluded from output

    def _try_rule(self, rule: PatternRule, pos: int, end: int, final: bool
                  ) -> tuple[int, list[int]]:
        k = len(rule.elements)
        if rule.ordering == ORDERED:
            positions = list(range(pos, pos + k))
            for p, element in zip(positions, rule.elements):
                if p >= end:
                    # Tail not buffered; the prefix matched so far.
                    return (_IMPOSSIBLE if final else _UNKNOWN), []
                if p in self._consumed or self._is_barrier(p):
                    return _IMPOSSIBLE, []
                if self._action_at(p).label != element:
                    return _IMPOSSIBLE, []
            if not rule.admits(self._action_at(p) for p in positions):
                return _IMPOSSIBLE, []
            return _MATCH, positions
        # Order-free: earliest valid combination inside the window, which is
        # truncated at the first OFF_TASK barrier. New input only appends
        # later positions, so a match found on a partial window is already
        # the earliest one.
        window_end = min(pos + self.rules.window, end)
        available = []
        complete = pos + self.rules.window <= end or final
        for p in range(pos, window_end):
            if self._is_barrier(p):
                complete = True
                break
            if p not in self._consumed:
                available.append(p)
        needed = sorted(e.value for e in rule.elements)
        if available and available[0] == pos and len(available) >= k:
            for combo in combinations(available[1:], k - 1):
                positions = [pos, *combo]
                labels = sorted(self._action_at(p).label.value for p in positions)
                if labels != needed:
                    continue
                if rule.admits(self._action_at(p) for p in positions):
                    return _MATCH, positions
        return (_IMPOSSIBLE if complete else _UNKNOWN), []


def parse_actions(
    actions: Iterable[ActionRecord], rules: CompiledRules
) -> list[ProcessEvent]:
    """Batch convenience over ProcessParser."""
    parser = ProcessParser(rules)
    events: list[ProcessEvent] = []
    for action in actions:
        events.extend(parser.feed(action))
    events.extend(parser.finish())
    return events


class MetricValue(NamedTuple):
    """A fraction in [0, 1]; ``defined`` is False when the denominator was 0."""

    value: float
    defined: bool = True


def trace_coverage(
    actions: Iterable[ActionRecord], processes: Iterable[ProcessEvent]
) -> MetricValue:
    """Fraction of non-OFF_TASK actions consumed by some process event."""
    consumed: set[str] = set()
    for event in processes:
        consumed.update(event.matched_action_ids)
    relevant = [a for a in actions if a.label != ActionLabel.OFF_TASK]
    if not relevant:
        return MetricValue(0.0, defined=False)
    hits = sum(1 for a in relevant if a.action_id in consumed)
    return MetricValue(hits / len(relevant), defined=True)
