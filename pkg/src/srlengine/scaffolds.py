"""Timed scaffold delivery with per-option personalisation.

Five scaffolds fire on a configured minute schedule over a request/response
protocol: the client polls with its elapsed time and condition, the engine
answers with the due scaffold. Generalised responses always carry all four
options; personalised responses disable an option once a process event
produced by that option's satisfying rule has been detected, and omit the
scaffold entirely when every option is disabled. Checked options become a
per-scaffold to-do list the learner can tick off, reorder, and revisit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Callable

from .model import RawTraceEvent, SessionState, ValidationError
from .processes import ProcessEvent

REQUEST_CONDITIONS = ("generalised", "personalised")

# Sub-actions that only mark UI activity and change no engine state.
_UI_ONLY_SUB_ACTIONS = frozenset({
    "Message_Triggered",
    "Message_Displayed",
    "Notification_Clicked",
    "Message_Closed",
    "CurrToDoList_Displayed",
    "PrevToDoList_Displayed",
    "CurrToDoList_Edit",
    "PrevToDoList_Edit",
    "ToDoList_Closed",
    "PrevToDoListItem_ClickedLink",
    "NextToDoListItem_ClickedLink",
})


@dataclass(frozen=True)
class ScaffoldOption:
    option_id: str
    text: str
    satisfying_rule_id: str

    def to_document(self) -> dict[str, Any]:
        return {
            "option_id": self.option_id,
            "text": self.text,
            "satisfying_rule_id": self.satisfying_rule_id,
        }


@dataclass(frozen=True)
class ScaffoldSpec:
    scaffold_id: int
    name: str
    trigger_minute: int
    prompt_message: str
    options: tuple[ScaffoldOption, ...]

    def __post_init__(self) -> None:
        if len(self.options) != 4:
            raise ValidationError(
                f"scaffold {self.scaffold_id} must have exactly 4 options",
                field="scaffold_contents.options",
            )

    @property
    def trigger_ms(self) -> int:
        return self.trigger_minute * 60_000

    def content_document(self) -> dict[str, Any]:
        return {
            "scaffold_id": self.scaffold_id,
            "name": self.name,
            "prompt_message": self.prompt_message,
            "options": [o.to_document() for o in self.options],
        }


@dataclass(frozen=True)
class ScaffoldRequest:
    user_id: str
    session_id: str
    condition: str
    elapsed: int  # ms

    def validate(self) -> None:
        if self.condition not in REQUEST_CONDITIONS:
            raise ValidationError(
                f"unknown scaffolding condition {self.condition!r}", field="condition"
            )
        if self.elapsed < 0:
            raise ValidationError("elapsed must be >= 0", field="elapsed_ms")


@dataclass(frozen=True)
class ResponseOption:
    option_id: str
    text: str
    enabled: bool


@dataclass(frozen=True)
class ScaffoldResponse:
    scaffold_id: int
    prompt_message: str
    options: tuple[ResponseOption, ...]
    omitted: bool

    def to_wire(self) -> dict[str, Any]:
        return {
            "scaffold_id": self.scaffold_id,
            "message": self.prompt_message,
            "options": [
                {"id": o.option_id, "text": o.text, "enabled": o.enabled}
                for o in self.options
            ],
            "omitted": self.omitted,
        }


@dataclass(frozen=True)
class ToDoItem:
    option_id: str
    checked: bool = False


@dataclass
class ToDoList:
    session_id: str
    scaffold_id: int
    items: list[ToDoItem] = field(default_factory=list)
    created_at: int = 0  # ms

    def to_wire(self) -> dict[str, Any]:
        return {
            "session_id": self.session_id,
            "scaffold_id": self.scaffold_id,
            "items": [{"option_id": i.option_id, "checked": i.checked} for i in self.items],
            "created_at": self.created_at,
        }


@dataclass(frozen=True)
class ScaffoldDelivery:
    """One entry of SessionState.scaffolds_delivered."""

    scaffold_id: int
    elapsed: int
    outcome: str  # delivered | omitted
    response: ScaffoldResponse


def due_scaffold(request: ScaffoldRequest, config, delivered: set[int]) -> int | None:
    """Lowest-numbered undelivered scaffold whose trigger time has passed."""
    for spec in sorted(config.scaffold_contents, key=lambda s: s.scaffold_id):
        if spec.scaffold_id in delivered:
            continue
        if spec.trigger_ms <= request.elapsed:
            return spec.scaffold_id
    return None


@dataclass(frozen=True)
class Interaction:
    """A scaffold popup / to-do list sub-action arriving from the client."""

    session_id: str
    user_id: str
    sub_action: str
    elapsed: int
    option_id: str | None = None
    order: tuple[str, ...] | None = None
    scaffold_id: int | None = None


class ScaffoldingEngine:
    """Serves scaffolds and tracks per-session popup and to-do list state.

    ``event_sink`` receives the synthesised scaffold_interact trace events so
    deliveries and interactions show up in the action stream like any other
    tool usage.
    """

    def __init__(self, config, event_sink: Callable[[RawTraceEvent], None] | None = None):
        self._config = config
        self._sink = event_sink
        self._specs = {s.scaffold_id: s for s in config.scaffold_contents}
        # (session_id, scaffold_id) -> option ids checked in the open popup
        self._pending: dict[tuple[str, int], list[str]] = {}
        self._todo: dict[tuple[str, int], ToDoList] = {}
        self._event_seq = 0

    # request/response protocol

    def evaluate_request(
        self, request: ScaffoldRequest, state: SessionState
    ) -> ScaffoldResponse | None:
        request.validate()
        state.advance(request.elapsed)
        delivered = {d.scaffold_id for d in state.scaffolds_delivered}
        scaffold_id = due_scaffold(request, self._config, delivered)
        if scaffold_id is None:
            # Re-requests after delivery are idempotent: they see the prior
            # response again and change nothing.
            if state.scaffolds_delivered:
                return state.scaffolds_delivered[-1].response
            return None
        spec = self._specs[scaffold_id]
        options = tuple(
            ResponseOption(
                option_id=o.option_id,
                text=o.text,
                enabled=(
                    True
                    if request.condition == "generalised"
                    else not self._detected(state, o.satisfying_rule_id, request.elapsed)
                ),
            )
            for o in spec.options
        )
        omitted = all(not o.enabled for o in options)
        response = ScaffoldResponse(
            scaffold_id=scaffold_id,
            prompt_message=spec.prompt_message,
            options=options,
            omitted=omitted,
        )
        state.scaffolds_delivered.append(
            ScaffoldDelivery(
                scaffold_id=scaffold_id,
                elapsed=request.elapsed,
                outcome="omitted" if omitted else "delivered",
                response=response,
            )
        )
        self._emit(
            session_id=request.session_id,
            user_id=request.user_id,
            elapsed=request.elapsed,
            sub_action="Message_Triggered",
            scaffold_id=scaffold_id,
        )
        return response

    def restore_delivery(self, state: SessionState, delivery: ScaffoldDelivery) -> None:
        """Re-attach a persisted delivery after restart (no trace emission)."""
        state.scaffolds_delivered.append(delivery)

    def restore_todo(self, todo: ToDoList) -> None:
        self._todo[(todo.session_id, todo.scaffold_id)] = todo

    # popup and to-do list interactions

    def record_interaction(
        self, interaction: Interaction, state: SessionState
    ) -> ToDoList | None:
        if not state.scaffolds_delivered:
            raise ValidationError(
                "no scaffold has been displayed in this session",
                field="sub_action",
            )
        sub = interaction.sub_action
        scaffold_id = interaction.scaffold_id
        if scaffold_id is None:
            scaffold_id = state.scaffolds_delivered[-1].scaffold_id
        delivery = next(
            (d for d in state.scaffolds_delivered if d.scaffold_id == scaffold_id),
            None,
        )
        if delivery is None:
            raise ValidationError(
                f"scaffold {scaffold_id} was never displayed", field="scaffold_id"
            )

        key = (interaction.session_id, scaffold_id)
        result: ToDoList | None = None
        if sub in _UI_ONLY_SUB_ACTIONS:
            pass
        elif sub in ("MessageOption_Checked", "MessageOption_UnChecked"):
            option = self._displayed_option(delivery, interaction.option_id)
            pending = self._pending.setdefault(key, [])
            if sub == "MessageOption_Checked":
                if option.option_id not in pending:
                    pending.append(option.option_id)
            elif option.option_id in pending:
                pending.remove(option.option_id)
        elif sub == "CreateChecklist":
            selected = self._pending.pop(key, [])
            todo = ToDoList(
                session_id=interaction.session_id,
                scaffold_id=scaffold_id,
                items=[ToDoItem(option_id=o) for o in selected],
                created_at=interaction.elapsed,
            )
            self._todo[key] = todo
            result = todo
        elif sub in (
            "CurrToDoListItem_Checked",
            "CurrToDoListItem_UnChecked",
            "PrevToDoListItem_Checked",
            "PrevToDoListItem_UnChecked",
        ):
            todo = self._existing_todo(key)
            checked = sub.endswith("_Checked")
            found = False
            for i, item in enumerate(todo.items):
                if item.option_id == interaction.option_id:
                    todo.items[i] = replace(item, checked=checked)
                    found = True
            if not found:
                raise ValidationError(
                    f"option {interaction.option_id!r} is not on the to-do list",
                    field="option_id",
                )
            result = todo
        elif sub in ("CurrToDoList_Re-Ordered", "PrevToDoList_Re-Ordered"):
            todo = self._existing_todo(key)
            order = list(interaction.order or ())
            if sorted(order) != sorted(i.option_id for i in todo.items):
                raise ValidationError(
                    "re-order must permute the existing to-do items", field="order"
                )
            by_id = {i.option_id: i for i in todo.items}
            todo.items = [by_id[o] for o in order]
            result = todo
        else:
            raise ValidationError(
                f"unknown scaffold sub-action {sub!r}", field="sub_action"
            )

        self._emit(
            session_id=interaction.session_id,
            user_id=interaction.user_id,
            elapsed=interaction.elapsed,
            sub_action=sub,
            scaffold_id=scaffold_id,
            option_id=interaction.option_id,
        )
        return result

    def todo_list(self, session_id: str, scaffold_id: int) -> ToDoList | None:
        return self._todo.get((session_id, scaffold_id))

    # internal

    def _detected(self, state: SessionState, rule_id: str, elapsed: int) -> bool:
        window = self._config.detection_window
        for event in state.detected_processes:
            if not isinstance(event, ProcessEvent) or event.rule_id != rule_id:
                continue
            if window is None or event.end >= elapsed - window:
                return True
        return False

    def _displayed_option(self, delivery: ScaffoldDelivery, option_id: str | None):
        for option in delivery.response.options:
            if option.option_id == option_id:
                if not option.enabled:
                    raise ValidationError(
                        f"option {option_id!r} was disabled", field="option_id"
                    )
                return option
        raise ValidationError(
            f"option {option_id!r} was never displayed", field="option_id"
        )

    def _existing_todo(self, key: tuple[str, int]) -> ToDoList:
        todo = self._todo.get(key)
        if todo is None:
            raise ValidationError(
                f"no to-do list exists for scaffold {key[1]}", field="scaffold_id"
            )
        return todo

    def _emit(
        self,
        session_id: str,
        user_id: str,
        elapsed: int,
        sub_action: str,
        scaffold_id: int,
        option_id: str | None = None,
    ) -> None:
        if self._sink is None:
            return
        self._event_seq += 1
        payload: dict[str, Any] = {"sub_action": sub_action, "scaffold_id": scaffold_id}
        if option_id is not None:
            payload["option_id"] = option_id
        self._sink(
            RawTraceEvent(
                event_id=f"sc-{session_id}-{self._event_seq}",
                session_id=session_id,
                user_id=user_id,
                timestamp=elapsed,
                event_kind="scaffold_interact",
                page_url="",
                payload=payload,
            )
        )
