"""Deterministic synthetic learner sessions for testing and demos.

Profiles are explicitly synthetic: archetype timings encode only the broad
tendency that stronger sessions orient earlier and settle into reading and
writing sooner, anchored to the default scaffold schedule. Every stream is
reproducible from its seed and passes ingest validation.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any

from .model import RawTraceEvent, SessionState, ValidationError
from .scaffolds import ScaffoldingEngine, ScaffoldRequest, ScaffoldResponse

READING_PAGES = [f"/reading/p{i}" for i in range(1, 7)]
EXTRA_PAGES = [f"/extras/e{i}" for i in range(1, 4)]
INSTRUCTIONS = "/instructions"
RUBRIC = "/rubric"
CONTENTS = "/contents"

ARCHETYPES = ("good", "average", "poor")


@dataclass(frozen=True)
class LearnerProfile:
    profile_id: str
    archetype: str
    orientation_onset: float  # minutes
    reading_start: float  # minutes
    writing_start: float  # minutes
    timer_rate: float  # checks per 10 minutes
    annotations_per_page: float
    planner_probability: float
    idle_gap_minutes: float = 0.0
    seed: int = 0

    def validate(self, config) -> None:
        duration = config.task_duration
        for name in ("orientation_onset", "reading_start", "writing_start"):
            value = getattr(self, name)
            if value < 0 or value >= duration:
                raise ValidationError(
                    f"{name}={value} outside the {duration}-minute task", field=name
                )
        if self.orientation_onset + self.idle_gap_minutes >= duration:
            raise ValidationError("idle gap pushes activity past the task end",
                                  field="idle_gap_minutes")
        for name in ("timer_rate", "annotations_per_page", "planner_probability"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be non-negative", field=name)

    def to_document(self) -> dict[str, Any]:
        return {
            "profile_id": self.profile_id,
            "archetype": self.archetype,
            "orientation_onset": self.orientation_onset,
            "reading_start": self.reading_start,
            "writing_start": self.writing_start,
            "timer_rate": self.timer_rate,
            "annotations_per_page": self.annotations_per_page,
            "planner_probability": self.planner_probability,
            "idle_gap_minutes": self.idle_gap_minutes,
            "seed": self.seed,
        }

    @classmethod
    def from_document(cls, doc: dict[str, Any]) -> "LearnerProfile":
        try:
            return cls(
                profile_id=str(doc["profile_id"]),
                archetype=str(doc.get("archetype", "average")),
                orientation_onset=float(doc["orientation_onset"]),
                reading_start=float(doc["reading_start"]),
                writing_start=float(doc["writing_start"]),
                timer_rate=float(doc.get("timer_rate", 2.0)),
                annotations_per_page=float(doc.get("annotations_per_page", 1.0)),
                planner_probability=float(doc.get("planner_probability", 0.2)),
                idle_gap_minutes=float(doc.get("idle_gap_minutes", 0.0)),
                seed=int(doc.get("seed", 0)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed profile document: {exc}") from exc


_ARCHETYPE_BASE = {
    "good": dict(orientation_onset=0.4, reading_start=1.5, writing_start=18.0,
                 timer_rate=3.0, annotations_per_page=1.5,
                 planner_probability=0.5, idle_gap_minutes=0.0),
    "average": dict(orientation_onset=3.0, reading_start=5.0, writing_start=24.0,
                    timer_rate=2.0, annotations_per_page=0.8,
                    planner_probability=0.25, idle_gap_minutes=0.0),
    "poor": dict(orientation_onset=8.0, reading_start=11.0, writing_start=30.0,
                 timer_rate=1.0, annotations_per_page=0.3,
                 planner_probability=0.1, idle_gap_minutes=6.0),
}


def archetype_profile(archetype: str, seed: int = 0) -> LearnerProfile:
    if archetype not in _ARCHETYPE_BASE:
        raise ValidationError(f"unknown archetype {archetype!r}", field="archetype")
    return LearnerProfile(
        profile_id=f"{archetype}-{seed}", archetype=archetype,
        seed=seed, **_ARCHETYPE_BASE[archetype],
    )


def load_profile(path: str | Path) -> LearnerProfile:
    with open(path, "r", encoding="utf-8") as fh:
        return LearnerProfile.from_document(json.load(fh))


class _Script:
    """Monotone event-stream builder."""

    def __init__(self, session_id: str, user_id: str, rng: random.Random):
        self.session_id = session_id
        self.user_id = user_id
        self.rng = rng
        self.t = 0
        self.url = ""
        self.events: list[RawTraceEvent] = []
        self._n = 0

    def advance(self, ms: float) -> None:
        self.t += max(1, int(ms))

    def emit(self, kind: str, payload: dict[str, Any] | None = None,
             url: str | None = None) -> None:
        if url is not None:
            self.url = url
        self._n += 1
        self.events.append(RawTraceEvent(
            event_id=f"{self.session_id}-e{self._n}",
            session_id=self.session_id,
            user_id=self.user_id,
            timestamp=self.t,
            event_kind=kind,
            page_url=self.url,
            payload=payload or {},
        ))
        self.advance(1)

    def visit(self, url: str, dwell_ms: float, scroll_every=(4000, 8000)) -> None:
        """Navigate to a page and scroll through it for roughly dwell_ms."""
        self.emit("navigation", url=url)
        leave = self.t + int(dwell_ms)
        while self.t < leave:
            step = self.rng.uniform(*scroll_every)
            if self.t + step >= leave:
                self.advance(leave - self.t)
                break
            self.advance(step)
            self.emit("scroll")


def generate_session(profile: LearnerProfile, config,
                     session_id: str | None = None,
                     user_id: str | None = None) -> list[RawTraceEvent]:
    """Deterministic, time-ordered event stream for one simulated session."""
    profile.validate(config)
    rng = random.Random(profile.seed)
    session_id = session_id or f"sim-{profile.profile_id}"
    user_id = user_id or f"learner-{profile.profile_id}"
    script = _Script(session_id, user_id, rng)
    duration_ms = config.task_duration * 60_000
    onset_ms = int(profile.orientation_onset * 60_000 * rng.uniform(0.85, 1.15))

    # Pre-orientation wandering for late starters.
    if onset_ms > 90_000:
        script.visit(CONTENTS, rng.uniform(4000, 9000))
        while script.t < onset_ms - 60_000:
            script.visit(rng.choice(EXTRA_PAGES), rng.uniform(20_000, 45_000))
            if profile.idle_gap_minutes and script.t < onset_ms / 2:
                script.advance(profile.idle_gap_minutes * 60_000)
        script.advance(max(0, onset_ms - script.t))
    else:
        script.advance(onset_ms)

    # Orientation: study the instructions past the engagement threshold, hop
    # through the table of contents, and settle on the first reading page.
    instruction_dwell = (config.instruction_dwell_threshold + rng.uniform(5, 25)) * 1000
    script.visit(INSTRUCTIONS, instruction_dwell, scroll_every=(3000, 6000))
    annotate = profile.annotations_per_page >= 1.0
    if annotate:
        script.emit("annotation_create", {"label": "goal"})
        script.advance(rng.uniform(1500, 4000))
    script.visit(CONTENTS, rng.uniform(2000, 5000))

    # Reading phase.
    writing_at = int(profile.writing_start * 60_000)
    pages = READING_PAGES[:]
    rng.shuffle(pages)
    visited: list[str] = []
    while script.t < min(writing_at, duration_ms - 60_000):
        page = (rng.choice(visited) if visited and rng.random() < 0.25
                else pages[len(visited) % len(pages)])
        if page not in visited:
            visited.append(page)
        script.visit(page, rng.uniform(40_000, 90_000))
        for _ in range(int(profile.annotations_per_page + rng.random())):
            script.emit("annotation_create", {"label": "note"})
            script.advance(rng.uniform(2000, 6000))
        if rng.random() < profile.timer_rate / 10:
            script.emit("timer_check")
            script.advance(rng.uniform(2000, 4000))
        if rng.random() < 0.15:
            script.visit(CONTENTS, rng.uniform(2000, 4000))

    # Writing phase: keystroke bursts with occasional rubric checks.
    script.emit("tool_open", {"tool": "writing"})
    script.advance(rng.uniform(2000, 5000))
    while script.t < duration_ms - 30_000:
        for _ in range(rng.randint(20, 50)):
            script.emit("essay_keystroke", {"chars": 1})
            script.advance(rng.uniform(150, 450))
        script.advance(rng.uniform(2000, 8000))
        roll = rng.random()
        if roll < 0.15:
            script.visit(RUBRIC, rng.uniform(16_000, 25_000))
            script.emit("tool_open", {"tool": "writing"})
            script.advance(rng.uniform(1000, 3000))
        elif roll < 0.15 + profile.timer_rate / 20:
            script.emit("timer_check")
            script.advance(rng.uniform(1500, 3000))

    return script.events


def poll_schedule(config, condition: str = "generalised",
                  poll_seconds: int | None = None,
                  state: SessionState | None = None,
                  engine: ScaffoldingEngine | None = None,
                  ) -> list[tuple[int, ScaffoldResponse]]:
    """Run a simulated poll clock over the whole task; returns deliveries.

    The clock ticks every poll interval; each tick issues one scaffold
    request. Deliveries are (elapsed_ms, response) for newly served
    scaffolds only.
    """
    poll_ms = (poll_seconds or config.poll_interval) * 1000
    state = state or SessionState(session_id="clock", user_id="clock")
    engine = engine or ScaffoldingEngine(config)
    deliveries: list[tuple[int, ScaffoldResponse]] = []
    seen: set[int] = set()
    elapsed = 0
    end = config.task_duration * 60_000
    while elapsed <= end:
        response = engine.evaluate_request(
            ScaffoldRequest(user_id=state.user_id, session_id=state.session_id,
                            condition=condition, elapsed=elapsed),
            state,
        )
        if response is not None and response.scaffold_id not in seen:
            seen.add(response.scaffold_id)
            deliveries.append((elapsed, response))
        elapsed += poll_ms
    return deliveries


def seeded_profiles(archetype: str, count: int, base_seed: int = 0) -> list[LearnerProfile]:
    base = archetype_profile(archetype)
    return [replace(base, profile_id=f"{archetype}-{base_seed + i}", seed=base_seed + i)
            for i in range(count)]
