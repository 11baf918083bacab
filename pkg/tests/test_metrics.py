from __future__ import annotations

import random
from itertools import count

import pytest

from srlengine.metrics import (
    ReferenceSegment,
    align,
    confusion_counts,
    evaluate,
    match_rate,
    read_reference_file,
    sensitivity_specificity,
    time_weighted_match_rate,
    write_reference_file,
)
from srlengine.model import ValidationError
from srlengine.processes import ProcessEvent, ProcessLabel

from oracles import align_oracle, confusion_oracle, match_rate_oracle

_n = count(1)

LABELS = [
    ProcessLabel.MC_ORIENTATION, ProcessLabel.MC_PLANNING,
    ProcessLabel.MC_MONITORING, ProcessLabel.MC_EVALUATION,
    ProcessLabel.LC_FIRST_READING, ProcessLabel.LC_RE_READING,
    ProcessLabel.HC_ELABORATION_ORGANISATION,
]


def seg(label, start, end, session="s1"):
    return ReferenceSegment(session_id=session, label=label, start=start, end=end)


def pe(label, start, end, session="s1"):
    return ProcessEvent(session_id=session, label=label, rule_id="R",
                        start=start, end=end,
                        matched_action_ids=(f"a{next(_n)}",))


def test_contained_event_pairs_with_segment():
    segment = seg(ProcessLabel.MC_ORIENTATION, 0, 10_000)
    event = pe(ProcessLabel.MC_ORIENTATION, 2_000, 8_000)
    assert align([segment], [event]) == [(segment, event)]


def test_segment_without_overlap_is_unmatched():
    segment = seg(ProcessLabel.MC_ORIENTATION, 0, 10_000)
    event = pe(ProcessLabel.MC_ORIENTATION, 20_000, 30_000)
    assert align([segment], [event]) == [(segment, None)]


def test_instantaneous_event_inside_segment_matches():
    segment = seg(ProcessLabel.MC_MONITORING, 0, 10_000)
    event = pe(ProcessLabel.MC_MONITORING, 5_000, 5_000)
    assert align([segment], [event]) == [(segment, event)]


def test_event_assigned_to_at_most_one_segment():
    segments = [seg(ProcessLabel.MC_ORIENTATION, 0, 10_000),
                seg(ProcessLabel.MC_ORIENTATION, 10_000, 20_000)]
    event = pe(ProcessLabel.MC_ORIENTATION, 4_000, 16_000)
    pairs = align(segments, [event])
    matched = [e for _, e in pairs if e is not None]
    assert matched == [event]  # overlap 6000 with first beats 6000... tie to earliest
    assert pairs[1][1] is None


def test_overlapping_reference_segments_rejected():
    segments = [seg(ProcessLabel.MC_ORIENTATION, 0, 10_000),
                seg(ProcessLabel.MC_PLANNING, 5_000, 15_000)]
    with pytest.raises(ValidationError, match="overlapping"):
        align(segments, [])


def _random_corpus(rng, n_segments=20, n_events=20, sessions=("s1", "s2")):
    segments = []
    for session in sessions:
        t = 0
        for _ in range(n_segments // len(sessions)):
            t += rng.randint(0, 5_000)
            dur = rng.randint(1_000, 30_000)
            segments.append(seg(rng.choice(LABELS), t, t + dur, session))
            t += dur
    events = []
    for session in sessions:
        for _ in range(n_events // len(sessions)):
            start = rng.randint(0, 200_000)
            events.append(pe(rng.choice(LABELS), start,
                             start + rng.choice([0, rng.randint(1, 40_000)]), session))
    return segments, events


def test_alignment_matches_exhaustive_assignment_on_random_corpora():
    rng = random.Random(7)
    for _ in range(100):
        segments, events = _random_corpus(rng)
        assert align(segments, events) == align_oracle(segments, events)


def test_match_rate_identical_labels():
    segments = [seg(ProcessLabel.MC_ORIENTATION, 0, 10_000),
                seg(ProcessLabel.MC_PLANNING, 10_000, 20_000)]
    events = [pe(ProcessLabel.MC_ORIENTATION, 0, 10_000),
              pe(ProcessLabel.MC_PLANNING, 10_000, 20_000)]
    assert match_rate(align(segments, events)).value == 1.0


def test_match_rate_half():
    segments = [seg(ProcessLabel.MC_ORIENTATION, 0, 10_000),
                seg(ProcessLabel.MC_PLANNING, 10_000, 20_000)]
    events = [pe(ProcessLabel.MC_ORIENTATION, 0, 10_000),
              pe(ProcessLabel.MC_MONITORING, 10_000, 20_000)]
    assert match_rate(align(segments, events)).value == 0.5


def test_match_rate_zero_segments_flagged():
    rate = match_rate([])
    assert rate.value == 0.0 and not rate.defined


def test_self_alignment_match_rate_is_one():
    rng = random.Random(17)
    segments, _ = _random_corpus(rng)
    events = [pe(s.label, s.start, s.end, s.session_id) for s in segments]
    assert match_rate(align(segments, events)).value == 1.0


def test_match_rate_matches_independent_count_on_random_corpora():
    rng = random.Random(27)
    for _ in range(100):
        segments, events = _random_corpus(rng)
        pairs = align(segments, events)
        hits, total = match_rate_oracle(pairs)
        assert match_rate(pairs).value == hits / total


def test_sensitivity_specificity_perfect_parser():
    segments = [seg(l, i * 10_000, i * 10_000 + 9_000) for i, l in enumerate(LABELS)]
    events = [pe(s.label, s.start, s.end) for s in segments]
    pairs = align(segments, events)
    for label in LABELS:
        sens, spec = sensitivity_specificity(pairs, label)
        assert (sens.value, spec.value) == (1.0, 1.0)


def test_sensitivity_undefined_when_label_absent():
    segments = [seg(ProcessLabel.MC_PLANNING, 0, 10_000)]
    events = [pe(ProcessLabel.MC_PLANNING, 0, 10_000)]
    pairs = align(segments, events)
    sens, spec = sensitivity_specificity(pairs, ProcessLabel.MC_EVALUATION)
    assert not sens.defined
    assert spec.defined and spec.value == 1.0


def test_no_process_has_no_confusion_metrics():
    with pytest.raises(ValidationError):
        sensitivity_specificity([], ProcessLabel.NO_PROCESS)


def test_confusion_counts_match_hand_arithmetic():
    segments = [
        seg(ProcessLabel.MC_ORIENTATION, 0, 10_000),
        seg(ProcessLabel.MC_ORIENTATION, 10_000, 20_000),
        seg(ProcessLabel.MC_PLANNING, 20_000, 30_000),
        seg(ProcessLabel.MC_MONITORING, 30_000, 40_000),
    ]
    events = [
        pe(ProcessLabel.MC_ORIENTATION, 0, 10_000),     # TP for orientation
        pe(ProcessLabel.MC_PLANNING, 10_000, 20_000),   # FN for orientation, FP planning
        pe(ProcessLabel.MC_PLANNING, 20_000, 30_000),   # TP planning
        # monitoring segment unmatched -> FN monitoring
    ]
    pairs = align(segments, events)
    assert confusion_counts(pairs, ProcessLabel.MC_ORIENTATION) == (1, 1, 0, 2)
    assert confusion_counts(pairs, ProcessLabel.MC_PLANNING) == (1, 0, 1, 2)
    assert confusion_counts(pairs, ProcessLabel.MC_MONITORING) == (0, 1, 0, 3)


def test_confusion_matches_oracle_and_sums_to_segment_count():
    rng = random.Random(37)
    for _ in range(100):
        segments, events = _random_corpus(rng)
        pairs = align(segments, events)
        for label in LABELS:
            tp, fn, fp, tn = confusion_counts(pairs, label)
            assert (tp, fn, fp, tn) == confusion_oracle(pairs, label)
            assert tp + fn + fp + tn == len(segments)
            assert min(tp, fn, fp, tn) >= 0
            sens, spec = sensitivity_specificity(pairs, label)
            if sens.defined:
                assert 0.0 <= sens.value <= 1.0
            if spec.defined:
                assert 0.0 <= spec.value <= 1.0


def test_label_renaming_invariance():
    rng = random.Random(47)
    segments, events = _random_corpus(rng)
    base = match_rate(align(segments, events)).value

    mapping = dict(zip(LABELS, LABELS[1:] + LABELS[:1]))
    renamed_segments = [seg(mapping[s.label], s.start, s.end, s.session_id)
                        for s in segments]
    renamed_events = [pe(mapping[e.label], e.start, e.end, e.session_id)
                      for e in events]
    renamed = match_rate(align(renamed_segments, renamed_events)).value
    assert renamed == base


def test_time_weighted_match_rate_secondary_indicator():
    segments = [seg(ProcessLabel.MC_ORIENTATION, 0, 30_000),
                seg(ProcessLabel.MC_PLANNING, 30_000, 40_000)]
    events = [pe(ProcessLabel.MC_ORIENTATION, 0, 30_000),
              pe(ProcessLabel.MC_MONITORING, 30_000, 40_000)]
    pairs = align(segments, events)
    assert match_rate(pairs).value == 0.5
    assert time_weighted_match_rate(pairs).value == 0.75  # 30s of 40s agree


def test_reference_file_round_trip(tmp_path):
    rng = random.Random(57)
    segments, _ = _random_corpus(rng)
    path = tmp_path / "reference.csv"
    write_reference_file(path, segments)
    assert read_reference_file(path) == segments


def test_evaluate_full_report():
    segments = [seg(ProcessLabel.MC_ORIENTATION, 0, 10_000)]
    events = [pe(ProcessLabel.MC_ORIENTATION, 0, 10_000)]
    result = evaluate(segments, events)
    assert result.match_rate.value == 1.0
    doc = result.to_document()
    assert doc["segments"] == 1 and doc["match_rate"] == 1.0
    table = result.render_table()
    assert "match_rate: 1.0000" in table
    assert "MC.Orientation" in table
