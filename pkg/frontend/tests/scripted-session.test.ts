/**
 * End-to-end scripted browser session against the real engine: highlight,
 * timer check, ten keystrokes, scaffold option check plus checklist creation,
 * then the log portal must show exactly the expected event sequence.
 * Skipped when the engine package is not importable.
 */

import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it, vi } from "vitest";

import { bootConsole } from "../src/main.js";

const PYTHON = process.env.SRLENGINE_PYTHON ?? "python3";
const engineAvailable = spawnSync(PYTHON, ["-c", "import srlengine"]).status === 0;

let proc: ChildProcess | null = null;
let baseUrl = "";

async function waitForEngine(): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt++) {
    try {
      const response = await fetch(`${baseUrl}/api/config`);
      if (response.ok) return;
    } catch {
      // not listening yet
    }
    await sleep(100);
  }
  throw new Error("engine did not come up");
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

async function logTotal(session: string): Promise<number> {
  const response = await fetch(
    `${baseUrl}/api/logs?kind=raw&participant_id=learner-e2e&limit=1&keyword=${session}`);
  return ((await response.json()) as { total: number }).total;
}

async function waitForTotal(session: string, expected: number): Promise<void> {
  for (let attempt = 0; attempt < 100; attempt++) {
    if ((await logTotal(session)) >= expected) return;
    await sleep(100);
  }
  throw new Error(`log portal never reached ${expected} events`);
}

describe.skipIf(!engineAvailable)("scripted session against the engine", () => {
  beforeAll(async () => {
    const port = 8900 + Math.floor(Math.random() * 500);
    baseUrl = `http://127.0.0.1:${port}`;
    const db = join(mkdtempSync(join(tmpdir(), "srlengine-e2e-")), "engine.db");
    proc = spawn(PYTHON, ["-m", "srlengine.cli", "serve",
      "--port", String(port), "--db", db], { stdio: "ignore" });
    await waitForEngine();
  }, 30_000);

  afterAll(() => {
    proc?.kill();
  });

  it("produces exactly the expected event sequence in the log portal", async () => {
    const session = `e2e-${Date.now()}`;
    const root = document.createElement("div");
    document.body.appendChild(root);

    vi.useFakeTimers({ toFake: ["Date"] });
    const startedAt = Date.now();
    try {
      const console_ = bootConsole(root, {
        baseUrl,
        sessionId: session,
        userId: "learner-e2e",
        condition: "generalised",
        taskDurationMs: 45 * 60_000,
        pollIntervalMs: 600_000, // poll manually below
      });

      // read a page and highlight a passage
      vi.setSystemTime(startedAt + 20_000);
      console_.navigate("/reading/p1");
      const paragraph = root.querySelector<HTMLElement>(".reading-area p")!;
      const range = document.createRange();
      range.setStart(paragraph.firstChild!, 0);
      range.setEnd(paragraph.firstChild!, 16);
      const selection = window.getSelection()!;
      selection.removeAllRanges();
      selection.addRange(range);
      root.querySelector<HTMLElement>(".reading-area")!
        .dispatchEvent(new MouseEvent("mouseup", { bubbles: true }));
      root.querySelector<HTMLButtonElement>(".annotation-pane button")!.click();

      // check the timer
      vi.setSystemTime(startedAt + 40_000);
      root.querySelector<HTMLButtonElement>(".timer-icon")!.click();

      // type ten keystrokes into the writing pad
      vi.setSystemTime(startedAt + 60_000);
      root.querySelector<HTMLButtonElement>(".editor-icon")!.click();
      const textarea = root.querySelector<HTMLTextAreaElement>(".editor-textarea")!;
      for (const key of "essay text") {
        textarea.dispatchEvent(new KeyboardEvent("keydown", { key }));
      }

      await console_.recorder.flush();
      await waitForTotal(session, 16); // everything above is in the portal

      // the orientation scaffold is due at two minutes
      vi.setSystemTime(startedAt + 125_000);
      await console_.scaffoldUi.poll();
      await sleep(300);
      const boxes = [...root.querySelectorAll<HTMLInputElement>(
        ".scaffold-option input")];
      expect(boxes).toHaveLength(4);
      expect(boxes.every((b) => !b.disabled)).toBe(true); // generalised
      boxes[1].click();
      await sleep(300);
      root.querySelector<HTMLButtonElement>(".scaffold-confirm")!.click();
      await sleep(300);

      await waitForTotal(session, 21);
      const response = await fetch(
        `${baseUrl}/api/logs?kind=raw&participant_id=learner-e2e&limit=100&keyword=${session}`);
      const body = (await response.json()) as {
        records: { event_kind: string; payload: { sub_action?: string } }[];
      };
      const chronological = [...body.records].reverse();
      const sequence = chronological.map((r) =>
        r.event_kind === "scaffold_interact"
          ? `scaffold_interact:${r.payload.sub_action}`
          : r.event_kind);
      expect(sequence).toEqual([
        "navigation",            // initial /contents
        "navigation",            // /reading/p1
        "annotation_create",
        "annotation_label",
        "timer_check",
        "tool_open",
        ...Array(10).fill("essay_keystroke"),
        "scaffold_interact:Message_Triggered",   // engine-side delivery record
        "scaffold_interact:Message_Displayed",
        "scaffold_interact:MessageOption_Checked",
        "scaffold_interact:CreateChecklist",
        "scaffold_interact:CurrToDoList_Displayed",
      ]);

      // the checklist came from the checked option
      const todoItems = [...root.querySelectorAll(".todo-item span")];
      expect(todoItems.map((i) => i.textContent)).toEqual([
        "Check the essay rubric carefully",
      ]);
    } finally {
      vi.useRealTimers();
    }
  }, 60_000);
});
