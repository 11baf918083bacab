"""Builders shared across test modules."""

from __future__ import annotations

import random
from itertools import count

from srlengine.actions import ActionLabel, ActionRecord
from srlengine.model import RawTraceEvent
from srlengine.processes import ORDER_FREE, ORDERED, PatternRule, ProcessLabel, RuleGuard

_ids = count(1)


def mk_event(kind: str, ts: int, session: str = "s1", user: str = "u1",
             url: str = "", payload: dict | None = None) -> RawTraceEvent:
    return RawTraceEvent(
        event_id=f"e{next(_ids)}",
        session_id=session,
        user_id=user,
        timestamp=ts,
        event_kind=kind,
        page_url=url,
        payload=payload or {},
    )


def mk_action(label: ActionLabel | str, start: int, end: int | None = None,
              session: str = "s1", page_class: str | None = None,
              sub_action: str | None = None) -> ActionRecord:
    label = ActionLabel(label)
    return ActionRecord(
        action_id=f"{session}:t{next(_ids)}",
        session_id=session,
        label=label,
        start=start,
        end=end if end is not None else start,
        source_event_ids=() if label is ActionLabel.OFF_TASK else (f"src{next(_ids)}",),
        sub_action=sub_action,
        page_class=page_class,
    )


def mk_rule(rule_id: str, label: str, elements: list[str], ordering: str = ORDERED,
            priority: int = 0, guards: tuple[RuleGuard, ...] = ()) -> PatternRule:
    return PatternRule(
        rule_id=rule_id,
        label=ProcessLabel(label),
        elements=tuple(ActionLabel(e) for e in elements),
        ordering=ordering,
        guards=guards,
        priority=priority,
    )


_STREAM_LABELS = [
    "GENERAL_INSTRUCTION", "RUBRIC", "RELEVANT_READING", "RELEVANT_RE-READING",
    "IRRELEVANT_READING", "NAVIGATION", "OPEN_ESSAY", "WRITE_ESSAY",
    "EDIT_ANNOTATION", "READ_ANNOTATION", "TIMER", "PLANNER", "OFF_TASK",
    "SCAFFOLDING",
]


def random_action_stream(rng: random.Random, max_len: int = 12,
                         session: str = "s1") -> list[ActionRecord]:
    """Random labelled action stream with increasing, occasionally gappy times."""
    n = rng.randint(0, max_len)
    t = 0
    stream = []
    for _ in range(n):
        t += rng.randint(1, 5_000)
        dwell = rng.choice([0, rng.randint(1, 30_000)])
        stream.append(mk_action(rng.choice(_STREAM_LABELS), t, t + dwell,
                                session=session))
        t += dwell
    return stream


def random_rule_set(rng: random.Random) -> tuple[list[PatternRule], int]:
    """A random small rule set plus an order-free window size."""
    window = rng.randint(2, 6)
    rules = []
    pool = [l for l in _STREAM_LABELS if l not in ("OFF_TASK",)]
    for i in range(rng.randint(2, 6)):
        k = rng.randint(1, 3)
        elements = [rng.choice(pool) for _ in range(k)]
        ordering = rng.choice([ORDERED, ORDER_FREE])
        guards: tuple[RuleGuard, ...] = ()
        if rng.random() < 0.3:
            guards = (RuleGuard(
                element=ActionLabel(rng.choice(elements)),
                min_dwell_ms=rng.randint(1, 20_000),
            ),)
        rules.append(mk_rule(
            rule_id=f"R{i}",
            label=rng.choice([
                "MC.Orientation", "MC.Planning", "MC.Monitoring", "MC.Evaluation",
                "LC.First-reading", "LC.Re-reading", "HC.Elaboration-Organisation",
            ]),
            elements=elements,
            ordering=ordering,
            priority=rng.randint(0, 30),
            guards=guards,
        ))
    return rules, window
