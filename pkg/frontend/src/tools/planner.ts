/**
 * Drag-and-drop task planner. Predefined plan items are dragged into slots
 * on a simple timeline; every open/close, drop, and removal is logged as a
 * planner_interact event.
 */

import { EventRecorder } from "../recorder.js";

const DEFAULT_ITEMS = [
  "Read the instructions",
  "Skim the materials",
  "Take notes",
  "Draft the essay",
  "Revise against the rubric",
];

export class PlannerTool {
  readonly slots: (string | null)[];
  private panel: HTMLElement | null = null;

  constructor(
    private readonly recorder: EventRecorder,
    private readonly container: HTMLElement,
    private readonly currentPage: () => string,
    slotCount = 5,
  ) {
    this.slots = new Array(slotCount).fill(null);
  }

  mount(): void {
    const icon = document.createElement("button");
    icon.className = "planner-icon";
    icon.textContent = "plan";
    icon.addEventListener("click", () => (this.panel ? this.close() : this.open()));
    this.container.appendChild(icon);
  }

  open(): void {
    if (this.panel) return;
    this.recorder.record("planner_interact", this.currentPage(), { action: "opened" });
    const panel = document.createElement("div");
    panel.className = "planner-panel";

    const pool = document.createElement("div");
    pool.className = "planner-pool";
    for (const item of DEFAULT_ITEMS) {
      const chip = document.createElement("div");
      chip.className = "planner-item";
      chip.textContent = item;
      chip.draggable = true;
      chip.addEventListener("dragstart", (event) => {
        event.dataTransfer?.setData("text/plain", item);
      });
      pool.appendChild(chip);
    }

    const timeline = document.createElement("div");
    timeline.className = "planner-timeline";
    this.slots.forEach((_, index) => {
      const slot = document.createElement("div");
      slot.className = "planner-slot";
      slot.dataset.slot = String(index);
      slot.addEventListener("dragover", (event) => event.preventDefault());
      slot.addEventListener("drop", (event) => {
        event.preventDefault();
        const item = event.dataTransfer?.getData("text/plain");
        if (item) this.place(item, index);
      });
      slot.addEventListener("click", () => {
        if (this.slots[index] !== null) this.clear(index);
      });
      timeline.appendChild(slot);
    });

    panel.append(pool, timeline);
    this.container.appendChild(panel);
    this.panel = panel;
    this.render();
  }

  close(): void {
    if (!this.panel) return;
    this.panel.remove();
    this.panel = null;
    this.recorder.record("planner_interact", this.currentPage(), { action: "closed" });
  }

  place(item: string, slot: number): void {
    this.slots[slot] = item;
    this.recorder.record("planner_interact", this.currentPage(), {
      action: "placed",
      item,
      slot,
    });
    this.render();
  }

  clear(slot: number): void {
    const item = this.slots[slot];
    this.slots[slot] = null;
    this.recorder.record("planner_interact", this.currentPage(), {
      action: "removed",
      item,
      slot,
    });
    this.render();
  }

  private render(): void {
    if (!this.panel) return;
    this.panel.querySelectorAll<HTMLElement>(".planner-slot").forEach((el) => {
      const index = Number(el.dataset.slot);
      el.textContent = this.slots[index] ?? `slot ${index + 1}`;
      el.classList.toggle("planner-slot-filled", this.slots[index] !== null);
    });
  }
}
