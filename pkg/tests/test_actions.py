from __future__ import annotations

import random

import pytest

from srlengine.actions import (
    ActionLabel,
    ActionLabeler,
    detect_off_task,
    label_events,
    label_scaffold_interaction,
)
from srlengine.model import SessionState, ValidationError

from helpers import mk_action, mk_event
from oracles import offtask_oracle


def _state(session="s1", user="u1"):
    return SessionState(session_id=session, user_id=user)


def test_timer_check_becomes_timer_record(cfg):
    records = label_events([mk_event("timer_check", 1000, url="/reading/p1")],
                           _state(), cfg)
    assert [r.label for r in records] == [ActionLabel.TIMER]
    assert records[0].source_event_ids


def test_keystroke_burst_collapses_to_single_write_essay(cfg):
    events = [mk_event("tool_open", 0, url="/reading/p1", payload={"tool": "writing"})]
    t = 500
    for _ in range(120):
        events.append(mk_event("essay_keystroke", t, url="/reading/p1"))
        t += 300
    records = label_events(events, _state(), cfg)
    assert [r.label for r in records] == [ActionLabel.OPEN_ESSAY, ActionLabel.WRITE_ESSAY]
    burst = records[1]
    assert burst.start == 500 and burst.end == 500 + 119 * 300
    assert len(burst.source_event_ids) == 120


def test_burst_splits_when_gap_exceeds_ten_seconds(cfg):
    events = [mk_event("essay_keystroke", 0, url="/reading/p1"),
              mk_event("essay_keystroke", 11_000, url="/reading/p1")]
    records = label_events(events, _state(), cfg)
    assert [r.label for r in records] == [ActionLabel.WRITE_ESSAY, ActionLabel.WRITE_ESSAY]


def test_revisited_relevant_page_is_re_reading(cfg):
    state = _state()
    state.pages_visited["/reading/p2"] = 0  # visited earlier in the session
    events = [
        mk_event("navigation", 10_000, url="/reading/p2"),
        mk_event("scroll", 30_000, url="/reading/p2"),
        mk_event("scroll", 50_000, url="/reading/p2"),
        mk_event("navigation", 50_500, url="/contents"),
    ]
    records = label_events(events, state, cfg)
    assert records[0].label == ActionLabel.RELEVANT_RE_READING


def test_first_visit_long_dwell_is_first_reading(cfg):
    events = [
        mk_event("navigation", 0, url="/reading/p1"),
        mk_event("scroll", 20_000, url="/reading/p1"),
        mk_event("navigation", 40_000, url="/contents"),
    ]
    records = label_events(events, _state(), cfg)
    assert records[0].label == ActionLabel.RELEVANT_READING


def test_short_dwell_is_navigation(cfg):
    events = [
        mk_event("navigation", 0, url="/reading/p1"),
        mk_event("scroll", 5_000, url="/reading/p1"),
        mk_event("navigation", 14_000, url="/reading/p2"),
        mk_event("scroll", 15_000, url="/reading/p2"),
    ]
    records = label_events(events, _state(), cfg)
    assert records[0].label == ActionLabel.NAVIGATION
    assert records[0].start == 0 and records[0].end == 14_000


def test_dwell_at_threshold_reads(cfg):
    events = [
        mk_event("navigation", 0, url="/instructions"),
        mk_event("scroll", 8_000, url="/instructions"),
        mk_event("navigation", 15_000, url="/contents"),
    ]
    records = label_events(events, _state(), cfg)
    assert records[0].label == ActionLabel.GENERAL_INSTRUCTION


def test_table_of_contents_is_always_navigation(cfg):
    events = [
        mk_event("navigation", 0, url="/contents"),
        mk_event("scroll", 30_000, url="/contents"),
        mk_event("scroll", 60_000, url="/contents"),
        mk_event("navigation", 90_000, url="/reading/p1"),
    ]
    records = label_events(events, _state(), cfg)
    assert records[0].label == ActionLabel.NAVIGATION


def test_empty_stream_yields_empty_output(cfg):
    assert label_events([], _state(), cfg) == []


def test_mouse_move_is_noise(cfg):
    events = [mk_event("mouse_move", 1000, url="/reading/p1"),
              mk_event("mouse_move", 2000, url="/reading/p1")]
    assert label_events(events, _state(), cfg) == []


def test_annotation_interleaved_with_instruction_page(cfg):
    events = [
        mk_event("navigation", 0, url="/instructions"),
        mk_event("scroll", 6_000, url="/instructions"),
        mk_event("annotation_create", 9_000, url="/instructions"),
        mk_event("scroll", 12_000, url="/instructions"),
        mk_event("navigation", 20_000, url="/contents"),
    ]
    records = label_events(events, _state(), cfg)
    labels = [r.label for r in records]
    assert labels[:3] == [ActionLabel.GENERAL_INSTRUCTION, ActionLabel.EDIT_ANNOTATION,
                          ActionLabel.GENERAL_INSTRUCTION]
    assert labels[3:] == [ActionLabel.NAVIGATION]  # the flushed /contents hop
    for a, b in zip(records, records[1:]):
        assert a.end <= b.start


def test_out_of_order_event_rejected_stream_continues(cfg):
    state = _state()
    labeler = ActionLabeler(cfg, state)
    labeler.feed(mk_event("timer_check", 5_000, url="/reading/p1"))
    labeler.feed(mk_event("timer_check", 1_000, url="/reading/p1"))
    records = labeler.finish()
    assert len(labeler.rejected) == 1
    assert "out-of-order" in labeler.rejected[0][1]
    assert len(records) == 1  # the valid event still labels


def test_determinism(cfg):
    events = [
        mk_event("navigation", 0, url="/instructions"),
        mk_event("scroll", 16_000, url="/instructions"),
        mk_event("navigation", 20_000, url="/reading/p1"),
        mk_event("scroll", 45_000, url="/reading/p1"),
        mk_event("timer_check", 46_000, url="/reading/p1"),
    ]
    first = label_events(list(events), _state(), cfg)
    second = label_events(list(events), _state(), cfg)
    assert first == second


def test_completeness_over_random_streams(cfg):
    rng = random.Random(11)
    kinds = ["navigation", "scroll", "mouse_click", "keystroke", "timer_check",
             "annotation_create", "annotation_read", "content_search",
             "planner_interact", "essay_keystroke", "mouse_move"]
    urls = ["/instructions", "/rubric", "/contents", "/reading/p1", "/reading/p2",
            "/extras/e1"]
    for _ in range(50):
        t = 0
        events = []
        for _ in range(rng.randint(0, 60)):
            t += rng.randint(1, 20_000)
            events.append(mk_event(rng.choice(kinds), t, url=rng.choice(urls)))
        records = label_events(events, _state(), cfg)
        noise = {e.event_id for e in events if e.event_kind == "mouse_move"}
        seen: list[str] = []
        for record in records:
            seen.extend(record.source_event_ids)
        assert sorted(seen) == sorted(e.event_id for e in events
                                      if e.event_id not in noise)
        # order preservation and non-overlap
        for a, b in zip(records, records[1:]):
            assert a.start <= b.start
            assert a.end <= b.start


def test_re_reading_monotonicity(cfg):
    rng = random.Random(5)
    state = _state()
    events = []
    t = 0
    for _ in range(12):
        url = rng.choice(["/reading/p1", "/reading/p2"])
        events.append(mk_event("navigation", t, url=url))
        dwell = rng.choice([5_000, 20_000, 40_000])
        events.append(mk_event("scroll", t + dwell // 2, url=url))
        t += dwell
        events.append(mk_event("navigation", t, url="/contents"))
        t += 3_000
    records = label_events(events, state, cfg)
    url_of = {e.event_id: e.page_url for e in events}
    seen_re = set()
    for record in records:
        page = url_of[record.source_event_ids[0]]
        if record.label == ActionLabel.RELEVANT_RE_READING:
            seen_re.add(page)
        if record.label == ActionLabel.RELEVANT_READING:
            assert page not in seen_re


# scaffold sub-actions


def test_scaffold_interaction_labels(cfg):
    event = mk_event("scaffold_interact", 1000,
                     payload={"sub_action": "MessageOption_Checked", "option_id": "b"})
    record = label_scaffold_interaction(event)
    assert record.label == ActionLabel.SCAFFOLDING
    assert record.sub_action == "MessageOption_Checked"

    event = mk_event("scaffold_interact", 2000, payload={"sub_action": "CreateChecklist"})
    assert label_scaffold_interaction(event).sub_action == "CreateChecklist"


def test_unknown_sub_action_rejected(cfg):
    event = mk_event("scaffold_interact", 1000, payload={"sub_action": "Bogus_Action"})
    with pytest.raises(ValidationError, match="sub-action"):
        label_scaffold_interaction(event)


def test_wrong_kind_rejected(cfg):
    with pytest.raises(ValidationError):
        label_scaffold_interaction(mk_event("timer_check", 0))


# OFF_TASK insertion


def test_gap_of_301s_inserts_one_off_task(cfg):
    actions = [mk_action("TIMER", 0, 1_000), mk_action("TIMER", 302_000, 303_000)]
    out = detect_off_task(actions, cfg)
    labels = [a.label for a in out]
    assert labels == [ActionLabel.TIMER, ActionLabel.OFF_TASK, ActionLabel.TIMER]
    gap = out[1]
    assert gap.start == 1_000 and gap.end == 302_000
    assert gap.source_event_ids == ()


def test_gap_of_299s_inserts_nothing(cfg):
    actions = [mk_action("TIMER", 0, 1_000), mk_action("TIMER", 300_000, 301_000)]
    out = detect_off_task(actions, cfg)
    assert [a.label for a in out] == [ActionLabel.TIMER, ActionLabel.TIMER]


def test_three_400s_gaps_insert_three_off_task_records(cfg):
    # expected count computed by the independent gap scanner
    actions = []
    t = 0
    for _ in range(4):
        actions.append(mk_action("TIMER", t, t + 1_000))
        t += 1_000 + 400_000
    expected = offtask_oracle(actions, cfg.off_task_threshold * 1000)
    assert len(expected) == 3
    out = detect_off_task(actions, cfg)
    gaps = [(a.start, a.end) for a in out if a.label == ActionLabel.OFF_TASK]
    assert gaps == expected


def test_leading_and_trailing_gaps(cfg):
    actions = [mk_action("TIMER", 400_000, 401_000)]
    out = detect_off_task(actions, cfg, session_start=0, session_end=800_000)
    gaps = [(a.start, a.end) for a in out if a.label == ActionLabel.OFF_TASK]
    assert gaps == [(0, 400_000), (401_000, 800_000)]


def test_off_task_agrees_with_oracle_on_random_gap_sequences(cfg):
    rng = random.Random(99)
    threshold_ms = cfg.off_task_threshold * 1000
    for _ in range(1_000):
        t = rng.randint(0, 5_000)
        actions = []
        for _ in range(rng.randint(0, 12)):
            dur = rng.randint(0, 30_000)
            actions.append(mk_action("TIMER", t, t + dur))
            t += dur + rng.choice([rng.randint(0, 299_000),
                                   rng.randint(299_000, 301_000),
                                   rng.randint(301_000, 900_000)])
        session_end = t + rng.choice([0, rng.randint(0, 600_000)])
        expected = offtask_oracle(actions, threshold_ms, 0, session_end)
        out = detect_off_task(actions, cfg, 0, session_end)
        gaps = [(a.start, a.end) for a in out if a.label == ActionLabel.OFF_TASK]
        assert gaps == expected
        kept = [a for a in out if a.label != ActionLabel.OFF_TASK]
        assert kept == actions
