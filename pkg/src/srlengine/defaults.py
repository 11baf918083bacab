"""Built-in study document: a 45-minute essay-writing task.

Everything here is plain data in the configuration document schema (see
``config``). Other studies replace this wholesale via their own config file;
nothing in the engine is hard-wired to these values.

The pattern rule set contains only the documented action-to-process mappings;
studies extend it through the ``pattern_rules`` list of their config. The
option-to-rule assignments for scaffold personalisation are a configurable
interpretation: each option points at the rule whose detection makes the
suggested step redundant.
"""

from __future__ import annotations

from typing import Any

DEFAULT_TASK_DURATION_MINUTES = 45
DEFAULT_OFF_TASK_THRESHOLD_SECONDS = 300
DEFAULT_INSTRUCTION_DWELL_THRESHOLD_SECONDS = 15
DEFAULT_BATCH_FLUSH = {"max_events": 500, "max_interval_ms": 1000}
DEFAULT_ORDER_FREE_WINDOW = 5
DEFAULT_POLL_INTERVAL_SECONDS = 10

DEFAULT_PAGE_CATALOG: dict[str, Any] = {
    "entries": [
        {"prefix": "/instructions", "page_class": "GENERAL_INSTRUCTION"},
        {"prefix": "/rubric", "page_class": "RUBRIC"},
        {"prefix": "/contents", "page_class": "TABLE_OF_CONTENTS"},
        {"prefix": "/reading/", "page_class": "RELEVANT_CONTENT"},
        {"prefix": "/extras/", "page_class": "IRRELEVANT_CONTENT"},
    ],
    "default_class": "IRRELEVANT_CONTENT",
}

DEFAULT_PATTERN_RULES: list[dict[str, Any]] = [
    {
        "rule_id": "MC.O.1",
        "label": "MC.Orientation",
        "elements": ["GENERAL_INSTRUCTION", "NAVIGATION", "RELEVANT_READING"],
        "ordering": "ordered",
        "guards": [
            {
                "element": "GENERAL_INSTRUCTION",
                "min_dwell_ms": DEFAULT_INSTRUCTION_DWELL_THRESHOLD_SECONDS * 1000,
            }
        ],
        "priority": 30,
    },
    {
        "rule_id": "MC.O.2",
        "label": "MC.Orientation",
        "elements": ["GENERAL_INSTRUCTION", "EDIT_ANNOTATION"],
        "ordering": "order_free",
        "guards": [],
        "priority": 20,
    },
    {
        "rule_id": "MC.M.1",
        "label": "MC.Monitoring",
        "elements": ["TIMER"],
        "ordering": "ordered",
        "guards": [],
        "priority": 10,
    },
    {
        "rule_id": "MC.E.1",
        "label": "MC.Evaluation",
        "elements": ["OPEN_ESSAY", "RUBRIC"],
        "ordering": "ordered",
        "guards": [],
        "priority": 20,
    },
    {
        "rule_id": "LC.F.1",
        "label": "LC.First-reading",
        "elements": ["RELEVANT_READING"],
        "ordering": "ordered",
        "guards": [],
        "priority": 10,
    },
    {
        "rule_id": "LC.R.1",
        "label": "LC.Re-reading",
        "elements": ["RELEVANT_RE-READING"],
        "ordering": "ordered",
        "guards": [],
        "priority": 10,
    },
    {
        "rule_id": "HC.EO.1",
        "label": "HC.Elaboration-Organisation",
        "elements": ["WRITE_ESSAY"],
        "ordering": "ordered",
        "guards": [],
        "priority": 10,
    },
]

DEFAULT_SCAFFOLD_SCHEDULE = [
    {"scaffold_id": 1, "trigger_minute": 2},
    {"scaffold_id": 2, "trigger_minute": 7},
    {"scaffold_id": 3, "trigger_minute": 16},
    {"scaffold_id": 4, "trigger_minute": 21},
    {"scaffold_id": 5, "trigger_minute": 35},
]

DEFAULT_SCAFFOLD_CONTENTS: list[dict[str, Any]] = [
    {
        "scaffold_id": 1,
        "name": "Orientation",
        "prompt_message": (
            "Accurate understanding of the content and requirements of literacy "
            "task is critical. Based on your learning behaviour so far, we "
            "recommend the following steps:"
        ),
        "options": [
            {
                "option_id": "a",
                "text": "Use table of contents to get an overview and skim text",
                "satisfying_rule_id": "LC.F.1",
            },
            {
                "option_id": "b",
                "text": "Check the essay rubric carefully",
                "satisfying_rule_id": "MC.E.1",
            },
            {
                "option_id": "c",
                "text": "Make sure you understand the learning goals and instructions",
                "satisfying_rule_id": "MC.O.1",
            },
            {
                "option_id": "d",
                "text": "Process information by taking notes",
                "satisfying_rule_id": "MC.O.2",
            },
        ],
    },
    {
        "scaffold_id": 2,
        "name": "Start reading",
        "prompt_message": (
            "Efficient and high-quality reading of information on different "
            "topics in the material is essential. Based on your learning "
            "behaviour so far, we recommend the following steps:"
        ),
        "options": [
            {
                "option_id": "a",
                "text": "Note down important information",
                "satisfying_rule_id": "MC.O.2",
            },
            {
                "option_id": "b",
                "text": "Select what to read next using the table of contents",
                "satisfying_rule_id": "LC.F.1",
            },
            {
                "option_id": "c",
                "text": "Check time and monitor your reading progress",
                "satisfying_rule_id": "MC.M.1",
            },
            {
                "option_id": "d",
                "text": "Search for (specific) information",
                "satisfying_rule_id": "LC.R.1",
            },
        ],
    },
    {
        "scaffold_id": 3,
        "name": "Monitor reading",
        "prompt_message": (
            "Make sure you only read task-related pages and think about the "
            "relationship between reading and writing is the key to learning "
            "success. Based on your learning behaviour so far, we recommend "
            "the following steps:"
        ),
        "options": [
            {
                "option_id": "a",
                "text": "Review annotations and check what you have learned so far",
                "satisfying_rule_id": "MC.O.2",
            },
            {
                "option_id": "b",
                "text": "Review the learning goals and instructions to focus on relevant content",
                "satisfying_rule_id": "MC.O.1",
            },
            {
                "option_id": "c",
                "text": "Check your essay structure to determine what to read next",
                "satisfying_rule_id": "MC.E.1",
            },
            {
                "option_id": "d",
                "text": "Check the essay rubric",
                "satisfying_rule_id": "LC.R.1",
            },
        ],
    },
    {
        "scaffold_id": 4,
        "name": "Start writing",
        "prompt_message": (
            "Starting writing early and conscientiously writing a high-quality "
            "essay is central to the success of this task. Based on your "
            "learning behaviour so far, we recommend the following steps:"
        ),
        "options": [
            {
                "option_id": "a",
                "text": "Check the remaining time for writing",
                "satisfying_rule_id": "MC.M.1",
            },
            {
                "option_id": "b",
                "text": "Check and re-read the essay rubric",
                "satisfying_rule_id": "MC.E.1",
            },
            {
                "option_id": "c",
                "text": "Draft essay by using your own language and transferring learning to main points",
                "satisfying_rule_id": "HC.EO.1",
            },
            {
                "option_id": "d",
                "text": "Write the essay with help from notes",
                "satisfying_rule_id": "MC.O.2",
            },
        ],
    },
    {
        "scaffold_id": 5,
        "name": "Monitor writing",
        "prompt_message": (
            "At the end of the task, complete the essay according to the task "
            "instructions and rubric to get a high score. Based on your "
            "learning behaviour so far, we recommend the following steps:"
        ),
        "options": [
            {
                "option_id": "a",
                "text": "Check the essay rubric to revise your essay",
                "satisfying_rule_id": "MC.E.1",
            },
            {
                "option_id": "b",
                "text": "Edit your essay to make sure it's complete",
                "satisfying_rule_id": "HC.EO.1",
            },
            {
                "option_id": "c",
                "text": "Check the learning goals and instructions to avoid digress",
                "satisfying_rule_id": "MC.O.1",
            },
            {
                "option_id": "d",
                "text": "Check the timer to manage your time",
                "satisfying_rule_id": "MC.M.1",
            },
        ],
    },
]


def default_document() -> dict[str, Any]:
    """A fresh copy of the built-in configuration document."""
    import copy

    return copy.deepcopy({
        "task_duration": DEFAULT_TASK_DURATION_MINUTES,
        "off_task_threshold": DEFAULT_OFF_TASK_THRESHOLD_SECONDS,
        "instruction_dwell_threshold": DEFAULT_INSTRUCTION_DWELL_THRESHOLD_SECONDS,
        "batch_flush": DEFAULT_BATCH_FLUSH,
        "order_free_window": DEFAULT_ORDER_FREE_WINDOW,
        "poll_interval": DEFAULT_POLL_INTERVAL_SECONDS,
        "detection_window": None,
        "page_catalog": DEFAULT_PAGE_CATALOG,
        "scaffold_schedule": DEFAULT_SCAFFOLD_SCHEDULE,
        "scaffold_contents": DEFAULT_SCAFFOLD_CONTENTS,
        "pattern_rules": DEFAULT_PATTERN_RULES,
    })
