/**
 * Writing pad. Opening and closing the pad is logged, and every keystroke in
 * the textarea emits an essay_keystroke event carrying a coarse character
 * class (never the key itself).
 */

import { EventRecorder } from "../recorder.js";

export class WritingPad {
  private panel: HTMLElement | null = null;
  private textarea: HTMLTextAreaElement | null = null;

  constructor(
    private readonly recorder: EventRecorder,
    private readonly container: HTMLElement,
    private readonly currentPage: () => string,
  ) {}

  mount(): void {
    const icon = document.createElement("button");
    icon.className = "editor-icon";
    icon.textContent = "write";
    icon.addEventListener("click", () => (this.panel ? this.close() : this.open()));
    this.container.appendChild(icon);
  }

  open(): void {
    if (this.panel) return;
    this.recorder.record("tool_open", this.currentPage(), { tool: "writing" });
    const panel = document.createElement("div");
    panel.className = "editor-panel";
    const textarea = document.createElement("textarea");
    textarea.className = "editor-textarea";
    textarea.placeholder = "Write your essay here...";
    textarea.addEventListener("keydown", (event) => this.onKey(event));
    panel.appendChild(textarea);
    this.container.appendChild(panel);
    this.panel = panel;
    this.textarea = textarea;
    textarea.focus();
  }

  close(): void {
    if (!this.panel) return;
    this.panel.remove();
    this.panel = null;
    this.textarea = null;
    this.recorder.record("tool_close", this.currentPage(), { tool: "writing" });
  }

  isOpen(): boolean {
    return this.panel !== null;
  }

  content(): string {
    return this.textarea?.value ?? "";
  }

  private onKey(event: KeyboardEvent): void {
    this.recorder.record("essay_keystroke", this.currentPage(), {
      key_class: classifyKey(event.key),
      essay_length: this.content().length,
    });
  }
}

export function classifyKey(key: string): string {
  if (key === "Backspace" || key === "Delete") return "deletion";
  if (key === "Enter") return "newline";
  if (key === " " || key === "Spacebar") return "space";
  if (key.length === 1) return "character";
  return "control";
}
