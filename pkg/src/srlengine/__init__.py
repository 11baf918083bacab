"""Learner-trace ingestion, SRL process parsing, and timed scaffolding."""

from .actions import (
    ActionLabel,
    ActionLabeler,
    ActionRecord,
    detect_off_task,
    label_events,
    label_scaffold_interaction,
)
from .config import StudyConfig, default_config, load_config
from .metrics import (
    AlignmentResult,
    ReferenceSegment,
    align,
    evaluate,
    match_rate,
    sensitivity_specificity,
)
from .model import PageCatalog, RawTraceEvent, SessionState, ValidationError, classify_page
from .pipeline import SessionPipeline, run_offline
from .processes import (
    CompiledRules,
    PatternRule,
    ProcessEvent,
    ProcessLabel,
    ProcessParser,
    compile_rules,
    parse_actions,
    trace_coverage,
)
from .scaffolds import (
    ScaffoldingEngine,
    ScaffoldRequest,
    ScaffoldResponse,
    ScaffoldSpec,
    ToDoList,
    due_scaffold,
)
from .simulator import LearnerProfile, archetype_profile, generate_session, poll_schedule

__version__ = "0.1.0"

__all__ = [
    "ActionLabel",
    "ActionLabeler",
    "ActionRecord",
    "AlignmentResult",
    "CompiledRules",
    "LearnerProfile",
    "PageCatalog",
    "PatternRule",
    "ProcessEvent",
    "ProcessLabel",
    "ProcessParser",
    "RawTraceEvent",
    "ReferenceSegment",
    "ScaffoldingEngine",
    "ScaffoldRequest",
    "ScaffoldResponse",
    "ScaffoldSpec",
    "SessionPipeline",
    "SessionState",
    "StudyConfig",
    "ToDoList",
    "ValidationError",
    "align",
    "archetype_profile",
    "classify_page",
    "compile_rules",
    "default_config",
    "detect_off_task",
    "due_scaffold",
    "evaluate",
    "generate_session",
    "label_events",
    "label_scaffold_interaction",
    "load_config",
    "match_rate",
    "parse_actions",
    "poll_schedule",
    "run_offline",
    "sensitivity_specificity",
    "trace_coverage",
]
