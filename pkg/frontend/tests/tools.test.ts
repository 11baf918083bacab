import { beforeEach, describe, expect, it, vi } from "vitest";

import { AnnotationTool } from "../src/tools/annotation.js";
import { classifyKey, WritingPad } from "../src/tools/editor.js";
import { PlannerTool } from "../src/tools/planner.js";
import { TIMER_AUTOCLOSE_MS, TimerTool } from "../src/tools/timer.js";
import { makeRecorder, StubEngine } from "./stubs.js";

let engine: StubEngine;
let recorder: ReturnType<typeof makeRecorder>["recorder"];
let clock: { now: number };
let rail: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "";
  engine = new StubEngine();
  ({ recorder, clock } = makeRecorder(engine));
  rail = document.createElement("aside");
  document.body.appendChild(rail);
});

async function kinds(): Promise<[string, unknown][]> {
  await recorder.flush();
  return engine.events.map((e) => [e.event_kind, e.payload]);
}

describe("AnnotationTool", () => {
  it("emits create then label when a highlight is labelled", async () => {
    const tool = new AnnotationTool(recorder, rail, () => "/reading/p1");
    clock.now = 1000;
    tool.createAnnotation("technology will reshape schools", "key idea", null);
    const emitted = await kinds();
    expect(emitted.map(([kind]) => kind)).toEqual([
      "annotation_create", "annotation_label",
    ]);
    expect(emitted[1][1]).toMatchObject({ label: "key idea" });
  });

  it("logs note edits, reads, deletions, and searches", async () => {
    const tool = new AnnotationTool(recorder, rail, () => "/reading/p2");
    const entry = tool.createAnnotation("some text", "evidence", null);
    clock.now = 2000;
    tool.editNote(entry.id, "n");
    tool.editNote(entry.id, "ne");
    tool.read(entry.id);
    const hits = tool.search("evid");
    expect(hits).toHaveLength(1);
    tool.remove(entry.id);
    const emitted = await kinds();
    expect(emitted.map(([kind]) => kind)).toEqual([
      "annotation_create", "annotation_label",
      "annotation_edit", "annotation_edit",
      "annotation_read", "annotation_search", "annotation_delete",
    ]);
  });

  it("renders sidebar entries whose note inputs log per keystroke", async () => {
    const tool = new AnnotationTool(recorder, rail, () => "/reading/p1");
    tool.mount(document.createElement("article"));
    tool.createAnnotation("highlighted", "question", null);
    const note = rail.querySelector<HTMLInputElement>(".annotation-note");
    expect(note).not.toBeNull();
    note!.value = "why?";
    note!.dispatchEvent(new Event("input"));
    const emitted = await kinds();
    expect(emitted.map(([kind]) => kind)).toContain("annotation_edit");
  });
});

describe("TimerTool", () => {
  it("logs a timer_check and closes itself after two seconds", async () => {
    vi.useFakeTimers();
    const tool = new TimerTool(recorder, rail, () => "/reading/p1", () => 600_000);
    tool.mount();
    rail.querySelector<HTMLButtonElement>(".timer-icon")!.click();
    expect(tool.isOpen()).toBe(true);
    expect(rail.querySelector(".timer-readout")!.textContent).toBe("10:00 left");
    vi.advanceTimersByTime(TIMER_AUTOCLOSE_MS + 1);
    expect(tool.isOpen()).toBe(false);
    vi.useRealTimers();
    const emitted = await kinds();
    expect(emitted).toEqual([["timer_check", { remaining_ms: 600_000 }]]);
  });
});

describe("PlannerTool", () => {
  it("logs open, placements, removals, and close", async () => {
    const tool = new PlannerTool(recorder, rail, () => "/contents");
    tool.mount();
    tool.open();
    tool.place("Take notes", 1);
    tool.clear(1);
    tool.close();
    const emitted = await kinds();
    expect(emitted.map(([, payload]) => (payload as { action: string }).action))
      .toEqual(["opened", "placed", "removed", "closed"]);
    expect(emitted.every(([kind]) => kind === "planner_interact")).toBe(true);
  });

  it("accepts drops on timeline slots", async () => {
    const tool = new PlannerTool(recorder, rail, () => "/contents");
    tool.open();
    const slot = rail.querySelector<HTMLElement>('[data-slot="2"]')!;
    const transfer = {
      getData: () => "Draft the essay",
      setData: () => {},
    };
    const drop = new Event("drop", { cancelable: true }) as DragEvent;
    Object.defineProperty(drop, "dataTransfer", { value: transfer });
    slot.dispatchEvent(drop);
    expect(tool.slots[2]).toBe("Draft the essay");
  });
});

describe("WritingPad", () => {
  it("logs tool_open, one event per keystroke, and tool_close", async () => {
    const pad = new WritingPad(recorder, rail, () => "/reading/p3");
    pad.mount();
    pad.open();
    const textarea = rail.querySelector<HTMLTextAreaElement>(".editor-textarea")!;
    for (const key of ["H", "i", " ", "Backspace", "Enter"]) {
      textarea.dispatchEvent(new KeyboardEvent("keydown", { key }));
    }
    pad.close();
    const emitted = await kinds();
    expect(emitted.map(([kind]) => kind)).toEqual([
      "tool_open", "essay_keystroke", "essay_keystroke", "essay_keystroke",
      "essay_keystroke", "essay_keystroke", "tool_close",
    ]);
    expect(emitted[0][1]).toEqual({ tool: "writing" });
    expect(emitted.slice(1, 6).map(([, p]) => (p as { key_class: string }).key_class))
      .toEqual(["character", "character", "space", "deletion", "newline"]);
  });

  it("classifies keys coarsely and never records the key itself", () => {
    expect(classifyKey("x")).toBe("character");
    expect(classifyKey("Shift")).toBe("control");
    expect(classifyKey("Delete")).toBe("deletion");
  });
});
