"""Study configuration: the single document that parameterises the engine.

The document is JSON (key/value with nested lists). Field names are the
contract; see README for the full schema. Omitted fields fall back to the
built-in study in ``defaults``, so ``load_config({})`` is the default study.

Top-level keys:
  task_duration                  minutes, default 45
  off_task_threshold             seconds, default 300
  instruction_dwell_threshold    seconds, default 15
  batch_flush                    {max_events, max_interval_ms}
  order_free_window              actions per "<->" match window
  poll_interval                  client poll cadence, seconds
  detection_window               ms; null means any past detection counts
  page_catalog                   {entries: [{prefix, page_class}], default_class}
  scaffold_schedule              [{scaffold_id, trigger_minute}]
  scaffold_contents              [{scaffold_id, name, prompt_message, options}]
  pattern_rules                  [{rule_id, label, elements, ordering, guards, priority}]
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from . import defaults
from .model import PageCatalog, ValidationError
from .processes import PatternRule
from .scaffolds import ScaffoldOption, ScaffoldSpec


@dataclass(frozen=True)
class StudyConfig:
    task_duration: int  # minutes
    off_task_threshold: int  # seconds
    instruction_dwell_threshold: int  # seconds
    scaffold_schedule: tuple[tuple[int, int], ...]  # (scaffold_id, trigger_minute)
    scaffold_contents: tuple[ScaffoldSpec, ...]
    page_catalog: PageCatalog
    pattern_rules: tuple[PatternRule, ...]
    batch_flush: tuple[int, int]  # (max_events, max_interval_ms)
    order_free_window: int = defaults.DEFAULT_ORDER_FREE_WINDOW
    poll_interval: int = defaults.DEFAULT_POLL_INTERVAL_SECONDS
    detection_window: int | None = None

    def rule_ids(self) -> set[str]:
        return {rule.rule_id for rule in self.pattern_rules}

    def to_document(self) -> dict[str, Any]:
        """Serialise back to the configuration document form."""
        return {
            "task_duration": self.task_duration,
            "off_task_threshold": self.off_task_threshold,
            "instruction_dwell_threshold": self.instruction_dwell_threshold,
            "batch_flush": {
                "max_events": self.batch_flush[0],
                "max_interval_ms": self.batch_flush[1],
            },
            "order_free_window": self.order_free_window,
            "poll_interval": self.poll_interval,
            "detection_window": self.detection_window,
            "page_catalog": self.page_catalog.to_document(),
            "scaffold_schedule": [
                {"scaffold_id": sid, "trigger_minute": minute}
                for sid, minute in self.scaffold_schedule
            ],
            "scaffold_contents": [
                spec.content_document() for spec in self.scaffold_contents
            ],
            "pattern_rules": [rule.to_document() for rule in self.pattern_rules],
        }


def _require_int(doc: dict[str, Any], key: str, fallback: int) -> int:
    value = doc.get(key, fallback)
    if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
        raise ValidationError(f"{key} must be a positive integer", field=key)
    return value


def load_config(source: dict[str, Any] | str | Path) -> StudyConfig:
    """Parse and validate a configuration document (dict or JSON file path)."""
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        doc = source
    if not isinstance(doc, dict):
        raise ValidationError("configuration document must be an object")

    base = defaults.default_document()
    merged = {**base, **doc}

    task_duration = _require_int(merged, "task_duration", base["task_duration"])
    off_task = _require_int(merged, "off_task_threshold", base["off_task_threshold"])
    dwell = _require_int(
        merged, "instruction_dwell_threshold", base["instruction_dwell_threshold"]
    )
    window = _require_int(merged, "order_free_window", base["order_free_window"])
    poll = _require_int(merged, "poll_interval", base["poll_interval"])

    detection_window = merged.get("detection_window")
    if detection_window is not None and (
        not isinstance(detection_window, int)
        or isinstance(detection_window, bool)
        or detection_window <= 0
    ):
        raise ValidationError(
            "detection_window must be null or a positive integer (ms)",
            field="detection_window",
        )

    flush_doc = merged.get("batch_flush") or {}
    if not isinstance(flush_doc, dict):
        raise ValidationError("batch_flush must be an object", field="batch_flush")
    batch_flush = (
        _require_int(flush_doc, "max_events", base["batch_flush"]["max_events"]),
        _require_int(flush_doc, "max_interval_ms", base["batch_flush"]["max_interval_ms"]),
    )

    try:
        catalog = PageCatalog.from_document(merged.get("page_catalog") or {})
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed page_catalog: {exc}", field="page_catalog")

    rules = tuple(PatternRule.from_document(r) for r in merged.get("pattern_rules", []))
    rule_ids: set[str] = set()
    for rule in rules:
        if rule.rule_id in rule_ids:
            raise ValidationError(
                f"duplicate rule_id {rule.rule_id!r}", field="pattern_rules"
            )
        rule_ids.add(rule.rule_id)

    schedule: list[tuple[int, int]] = []
    for entry in merged.get("scaffold_schedule", []):
        try:
            schedule.append((int(entry["scaffold_id"]), int(entry["trigger_minute"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(
                f"malformed scaffold_schedule entry: {exc}", field="scaffold_schedule"
            )
    for (_, a), (_, b) in zip(schedule, schedule[1:]):
        if b <= a:
            raise ValidationError(
                "scaffold trigger minutes must be strictly increasing",
                field="scaffold_schedule",
            )
    for sid, minute in schedule:
        if minute >= task_duration:
            raise ValidationError(
                f"scaffold {sid} triggers at minute {minute}, beyond the task length",
                field="scaffold_schedule",
            )

    trigger_by_id = dict(schedule)
    if len(trigger_by_id) != len(schedule):
        raise ValidationError(
            "duplicate scaffold_id in scaffold_schedule", field="scaffold_schedule"
        )

    specs: list[ScaffoldSpec] = []
    for entry in merged.get("scaffold_contents", []):
        try:
            sid = int(entry["scaffold_id"])
            options = tuple(
                ScaffoldOption(
                    option_id=str(o["option_id"]),
                    text=str(o["text"]),
                    satisfying_rule_id=str(o["satisfying_rule_id"]),
                )
                for o in entry["options"]
            )
            spec = ScaffoldSpec(
                scaffold_id=sid,
                name=str(entry["name"]),
                trigger_minute=trigger_by_id.get(sid, -1),
                prompt_message=str(entry["prompt_message"]),
                options=options,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(
                f"malformed scaffold_contents entry: {exc}", field="scaffold_contents"
            )
        if spec.trigger_minute < 0:
            raise ValidationError(
                f"scaffold {sid} has contents but no schedule entry",
                field="scaffold_schedule",
            )
        specs.append(spec)

    spec_ids = {s.scaffold_id for s in specs}
    if len(spec_ids) != len(specs):
        raise ValidationError(
            "duplicate scaffold_id in scaffold_contents", field="scaffold_contents"
        )
    missing = set(trigger_by_id) - spec_ids
    if missing:
        raise ValidationError(
            f"scheduled scaffolds without contents: {sorted(missing)}",
            field="scaffold_contents",
        )
    for spec in specs:
        for option in spec.options:
            if option.satisfying_rule_id not in rule_ids:
                raise ValidationError(
                    f"scaffold {spec.scaffold_id} option {option.option_id!r} "
                    f"references unknown rule {option.satisfying_rule_id!r}",
                    field="scaffold_contents",
                )

    return StudyConfig(
        task_duration=task_duration,
        off_task_threshold=off_task,
        instruction_dwell_threshold=dwell,
        scaffold_schedule=tuple(schedule),
        scaffold_contents=tuple(sorted(specs, key=lambda s: s.scaffold_id)),
        page_catalog=catalog,
        pattern_rules=rules,
        batch_flush=batch_flush,
        order_free_window=window,
        poll_interval=poll,
        detection_window=detection_window,
    )


def default_config() -> StudyConfig:
    return load_config({})
