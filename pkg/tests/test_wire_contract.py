"""Cross-component contract check: the console's emitted-event corpus
(generated by the frontend test suite) must validate with the server-side
parser, field for field."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from srlengine.model import SCAFFOLD_SUB_ACTION_SET, RawTraceEvent

FIXTURE = Path(__file__).parent.parent / "frontend" / "tests" / "fixtures" / "emitted-events.json"


@pytest.fixture(scope="module")
def corpus():
    if not FIXTURE.exists():
        pytest.skip("frontend fixture not generated (run the frontend tests)")
    return json.loads(FIXTURE.read_text(encoding="utf-8"))


def test_every_console_event_passes_ingest_validation(corpus):
    assert corpus["events"], "fixture contains no events"
    for doc in corpus["events"]:
        event = RawTraceEvent.from_wire(doc)  # raises on any schema violation
        assert event.event_id == doc["event_id"]


def test_console_event_timestamps_are_batchable(corpus):
    by_session: dict[str, list[int]] = {}
    for doc in corpus["events"]:
        by_session.setdefault(doc["session_id"], []).append(doc["timestamp"])
    for timestamps in by_session.values():
        assert timestamps == sorted(timestamps)


def test_console_interactions_use_known_sub_actions(corpus):
    assert corpus["interactions"], "fixture contains no interactions"
    for doc in corpus["interactions"]:
        assert doc["sub_action"] in SCAFFOLD_SUB_ACTION_SET
        assert isinstance(doc["session_id"], str) and doc["session_id"]
        assert isinstance(doc["elapsed_ms"], int) and doc["elapsed_ms"] >= 0
