/**
 * Countdown widget behind an alarm-clock icon. Opening it logs a
 * timer_check; the readout closes itself after two seconds so checking the
 * time stays a deliberate, detectable act.
 */

import { EventRecorder } from "../recorder.js";

export const TIMER_AUTOCLOSE_MS = 2000;

export class TimerTool {
  private readout: HTMLElement | null = null;
  private closeTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly recorder: EventRecorder,
    private readonly container: HTMLElement,
    private readonly currentPage: () => string,
    private readonly remainingMs: () => number,
  ) {}

  mount(): void {
    const icon = document.createElement("button");
    icon.className = "timer-icon";
    icon.title = "time remaining";
    icon.textContent = "⏰";
    icon.addEventListener("click", () => this.open());
    this.container.appendChild(icon);
  }

  open(): void {
    this.recorder.record("timer_check", this.currentPage(), {
      remaining_ms: Math.max(0, Math.round(this.remainingMs())),
    });
    this.close();
    const readout = document.createElement("div");
    readout.className = "timer-readout";
    const remaining = Math.max(0, this.remainingMs());
    const minutes = Math.floor(remaining / 60000);
    const seconds = Math.floor((remaining % 60000) / 1000);
    readout.textContent = `${minutes}:${String(seconds).padStart(2, "0")} left`;
    this.container.appendChild(readout);
    this.readout = readout;
    this.closeTimer = setTimeout(() => this.close(), TIMER_AUTOCLOSE_MS);
  }

  close(): void {
    if (this.closeTimer !== null) {
      clearTimeout(this.closeTimer);
      this.closeTimer = null;
    }
    this.readout?.remove();
    this.readout = null;
  }

  isOpen(): boolean {
    return this.readout !== null;
  }
}
