"""Agreement between parsed process events and coded reference segments.

Reference segments stand in for externally coded data and arrive from a
delimited text file (columns: session_id, label, start_ms, end_ms, source).
Each segment is paired with the not-yet-paired process event of maximal
temporal overlap inside it (ties: earliest event start); instantaneous
events count as overlapping a segment that contains them. Match rate,
one-vs-rest sensitivity/specificity, and trace coverage are computed over
those pairs.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .actions import ActionRecord
from .model import ValidationError
from .processes import MetricValue, ProcessEvent, ProcessLabel, trace_coverage


@dataclass(frozen=True)
class ReferenceSegment:
    session_id: str
    label: ProcessLabel
    start: int
    end: int
    source: str = "synthetic"  # synthetic | think_aloud

    def __post_init__(self) -> None:
        if self.start > self.end:
            raise ValidationError("segment start after end", field="start")


AlignmentPair = tuple[ReferenceSegment, ProcessEvent | None]


def _overlap(segment: ReferenceSegment, event: ProcessEvent) -> int | None:
    """Overlap in ms, or None when the event lies outside the segment."""
    amount = min(segment.end, event.end) - max(segment.start, event.start)
    if amount > 0:
        return amount
    if event.start == event.end and segment.start <= event.start <= segment.end:
        return 0  # instantaneous event inside the segment
    return None


def _check_segments(reference: Sequence[ReferenceSegment]) -> None:
    by_session: dict[str, list[ReferenceSegment]] = {}
    for segment in reference:
        by_session.setdefault(segment.session_id, []).append(segment)
    for session_id, segments in by_session.items():
        for a, b in zip(segments, segments[1:]):
            if b.start < a.end:
                raise ValidationError(
                    f"overlapping reference segments in session {session_id}",
                    field="reference",
                )


def align(
    reference: Sequence[ReferenceSegment], processes: Sequence[ProcessEvent]
) -> list[AlignmentPair]:
    """Pair each segment with its maximal-overlap process event, if any."""
    _check_segments(reference)
    events_by_session: dict[str, list[ProcessEvent]] = {}
    for event in processes:
        events_by_session.setdefault(event.session_id, []).append(event)

    taken: set[tuple[str, int]] = set()  # each event pairs with one segment at most
    pairs: list[AlignmentPair] = []
    for segment in reference:
        events = events_by_session.get(segment.session_id, [])
        best: tuple[int, int, int] | None = None  # (-overlap, start, idx)
        for idx, event in enumerate(events):
            if (segment.session_id, idx) in taken:
                continue
            amount = _overlap(segment, event)
            if amount is None:
                continue
            key = (-amount, event.start, idx)
            if best is None or key < best:
                best = key
        if best is None:
            pairs.append((segment, None))
        else:
            idx = best[2]
            taken.add((segment.session_id, idx))
            pairs.append((segment, events_by_session[segment.session_id][idx]))
    return pairs


def match_rate(pairs: Sequence[AlignmentPair]) -> MetricValue:
    """Fraction of segments whose paired event carries the same label."""
    if not pairs:
        return MetricValue(0.0, defined=False)
    hits = sum(
        1 for segment, event in pairs if event is not None and event.label == segment.label
    )
    return MetricValue(hits / len(pairs), defined=True)


def time_weighted_match_rate(pairs: Sequence[AlignmentPair]) -> MetricValue:
    """Secondary indicator: label agreement weighted by segment duration."""
    total = sum(segment.end - segment.start for segment, _ in pairs)
    if total == 0:
        return MetricValue(0.0, defined=False)
    hits = sum(
        segment.end - segment.start
        for segment, event in pairs
        if event is not None and event.label == segment.label
    )
    return MetricValue(hits / total, defined=True)


def confusion_counts(
    pairs: Sequence[AlignmentPair], label: ProcessLabel
) -> tuple[int, int, int, int]:
    """One-vs-rest (TP, FN, FP, TN) over reference segments."""
    tp = fn = fp = tn = 0
    for segment, event in pairs:
        predicted = event.label if event is not None else None
        if segment.label == label:
            if predicted == label:
                tp += 1
            else:
                fn += 1
        else:
            if predicted == label:
                fp += 1
            else:
                tn += 1
    return tp, fn, fp, tn


def sensitivity_specificity(
    pairs: Sequence[AlignmentPair], label: ProcessLabel
) -> tuple[MetricValue, MetricValue]:
    if label is ProcessLabel.NO_PROCESS:
        raise ValidationError("NO_PROCESS has no confusion metrics", field="label")
    tp, fn, fp, tn = confusion_counts(pairs, label)
    sensitivity = (
        MetricValue(tp / (tp + fn), True) if tp + fn else MetricValue(0.0, False)
    )
    specificity = (
        MetricValue(tn / (tn + fp), True) if tn + fp else MetricValue(0.0, False)
    )
    return sensitivity, specificity


@dataclass
class AlignmentResult:
    """Full agreement report for one reference/parsed corpus."""

    pairs: list[AlignmentPair]
    match_rate: MetricValue
    time_weighted_match_rate: MetricValue
    per_label: dict[str, dict[str, Any]] = field(default_factory=dict)
    trace_coverage: MetricValue | None = None

    def to_document(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "segments": len(self.pairs),
            "matched": sum(1 for _, e in self.pairs if e is not None),
            "match_rate": self.match_rate.value,
            "match_rate_defined": self.match_rate.defined,
            "time_weighted_match_rate": self.time_weighted_match_rate.value,
            "per_label": self.per_label,
        }
        if self.trace_coverage is not None:
            doc["trace_coverage"] = self.trace_coverage.value
            doc["trace_coverage_defined"] = self.trace_coverage.defined
        return doc

    def render_table(self) -> str:
        out = io.StringIO()
        out.write(f"segments: {len(self.pairs)}\n")
        out.write(f"match_rate: {_fmt(self.match_rate)}\n")
        out.write(f"time_weighted_match_rate: {_fmt(self.time_weighted_match_rate)}\n")
        if self.trace_coverage is not None:
            out.write(f"trace_coverage: {_fmt(self.trace_coverage)}\n")
        out.write(f"{'label':<30} {'TP':>4} {'FN':>4} {'FP':>4} {'TN':>4} "
                  f"{'sens':>8} {'spec':>8}\n")
        for label, row in self.per_label.items():
            out.write(
                f"{label:<30} {row['tp']:>4} {row['fn']:>4} {row['fp']:>4} "
                f"{row['tn']:>4} {row['sensitivity']:>8} {row['specificity']:>8}\n"
            )
        return out.getvalue()


def _fmt(metric: MetricValue) -> str:
    return f"{metric.value:.4f}" if metric.defined else "undef"


def evaluate(
    reference: Sequence[ReferenceSegment],
    processes: Sequence[ProcessEvent],
    actions: Sequence[ActionRecord] | None = None,
) -> AlignmentResult:
    """Align and compute every agreement metric in one pass."""
    pairs = align(reference, processes)
    labels = sorted(
        {s.label for s, _ in pairs}
        | {e.label for _, e in pairs if e is not None},
        key=lambda l: l.value,
    )
    per_label: dict[str, dict[str, Any]] = {}
    for label in labels:
        if label is ProcessLabel.NO_PROCESS:
            continue
        tp, fn, fp, tn = confusion_counts(pairs, label)
        sens, spec = sensitivity_specificity(pairs, label)
        per_label[label.value] = {
            "tp": tp,
            "fn": fn,
            "fp": fp,
            "tn": tn,
            "sensitivity": _fmt(sens),
            "specificity": _fmt(spec),
        }
    coverage = trace_coverage(actions, processes) if actions is not None else None
    return AlignmentResult(
        pairs=pairs,
        match_rate=match_rate(pairs),
        time_weighted_match_rate=time_weighted_match_rate(pairs),
        per_label=per_label,
        trace_coverage=coverage,
    )


REFERENCE_COLUMNS = ("session_id", "label", "start_ms", "end_ms", "source")


def read_reference_file(path) -> list[ReferenceSegment]:
    """Load reference segments from delimited text (comma or tab)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        sample = fh.read(4096)
        fh.seek(0)
        delimiter = "\t" if "\t" in sample.splitlines()[0] else ","
        reader = csv.DictReader(fh, delimiter=delimiter)
        segments = []
        for row in reader:
            try:
                segments.append(
                    ReferenceSegment(
                        session_id=row["session_id"],
                        label=ProcessLabel(row["label"]),
                        start=int(row["start_ms"]),
                        end=int(row["end_ms"]),
                        source=row.get("source") or "synthetic",
                    )
                )
            except (KeyError, ValueError) as exc:
                raise ValidationError(f"malformed reference row {row!r}: {exc}")
    return segments


def write_reference_file(path, segments: Iterable[ReferenceSegment]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(REFERENCE_COLUMNS)
        for s in segments:
            writer.writerow([s.session_id, s.label.value, s.start, s.end, s.source])
