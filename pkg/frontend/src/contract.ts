/**
 * Wire contract with the engine. Field names and enumerations here must
 * byte-match the ingest schema; the contract test validates every event the
 * console can emit against this module.
 */

export const EVENT_KINDS = [
  "keystroke",
  "mouse_click",
  "mouse_move",
  "scroll",
  "navigation",
  "tool_open",
  "tool_close",
  "annotation_create",
  "annotation_edit",
  "annotation_delete",
  "annotation_read",
  "annotation_label",
  "annotation_search",
  "content_search",
  "timer_check",
  "planner_interact",
  "essay_keystroke",
  "scaffold_interact",
] as const;

export type EventKind = (typeof EVENT_KINDS)[number];

export const SCAFFOLD_SUB_ACTIONS = [
  "Message_Triggered",
  "Message_Displayed",
  "Notification_Clicked",
  "Message_Closed",
  "MessageOption_Checked",
  "MessageOption_UnChecked",
  "CreateChecklist",
  "CurrToDoList_Displayed",
  "PrevToDoList_Displayed",
  "CurrToDoList_Edit",
  "PrevToDoList_Edit",
  "ToDoList_Closed",
  "CurrToDoListItem_Checked",
  "CurrToDoListItem_UnChecked",
  "PrevToDoListItem_Checked",
  "PrevToDoListItem_UnChecked",
  "CurrToDoList_Re-Ordered",
  "PrevToDoList_Re-Ordered",
  "PrevToDoListItem_ClickedLink",
  "NextToDoListItem_ClickedLink",
] as const;

export type ScaffoldSubAction = (typeof SCAFFOLD_SUB_ACTIONS)[number];

export interface ToolEventEnvelope {
  event_id: string;
  session_id: string;
  user_id: string;
  timestamp: number; // ms since session start
  event_kind: EventKind;
  page_url: string;
  payload: Record<string, unknown>;
}

export interface IngestBatch {
  session_id: string;
  client_sequence: number;
  events: ToolEventEnvelope[];
}

export interface IngestAck {
  accepted_count: number;
  rejected: { event_id: string; reason: string }[];
  duplicate: boolean;
  backpressure?: boolean;
  retry_after_ms?: number;
}

export interface ScaffoldOptionWire {
  id: string;
  text: string;
  enabled: boolean;
}

export interface ScaffoldResponseWire {
  scaffold_id: number;
  message: string;
  options: ScaffoldOptionWire[];
  omitted: boolean;
}

export interface ScaffoldInteractionBody {
  session_id: string;
  user_id: string;
  sub_action: ScaffoldSubAction;
  elapsed_ms: number;
  option_id?: string;
  order?: string[];
  scaffold_id?: number;
}

const KIND_SET = new Set<string>(EVENT_KINDS);
const SUB_ACTION_SET = new Set<string>(SCAFFOLD_SUB_ACTIONS);

/** Violations of the ingest schema; an empty list means the envelope is valid. */
export function validateEnvelope(doc: ToolEventEnvelope): string[] {
  const problems: string[] = [];
  for (const field of ["event_id", "session_id", "user_id"] as const) {
    if (typeof doc[field] !== "string" || doc[field].length === 0) {
      problems.push(`${field} must be a non-empty string`);
    }
  }
  if (!Number.isInteger(doc.timestamp) || doc.timestamp < 0) {
    problems.push("timestamp must be a non-negative integer");
  }
  if (!KIND_SET.has(doc.event_kind)) {
    problems.push(`unknown event_kind ${String(doc.event_kind)}`);
  }
  if (typeof doc.page_url !== "string") {
    problems.push("page_url must be a string");
  }
  if (typeof doc.payload !== "object" || doc.payload === null || Array.isArray(doc.payload)) {
    problems.push("payload must be an object");
  }
  if (doc.event_kind === "scaffold_interact") {
    const sub = (doc.payload as { sub_action?: unknown }).sub_action;
    if (typeof sub !== "string" || !SUB_ACTION_SET.has(sub)) {
      problems.push(`unknown scaffold sub-action ${String(sub)}`);
    }
  }
  return problems;
}
