/**
 * Highlighter and notes sidebar. Selecting text in the reading area pops a
 * label pane; choosing a label wraps the selection in a <mark> and creates a
 * sidebar entry where notes can be typed (each note keystroke is logged) and
 * the annotation can be re-read, relabelled, searched, or deleted.
 */

import { EventRecorder } from "../recorder.js";

export interface AnnotationEntry {
  id: string;
  text: string;
  label: string;
  note: string;
  pageUrl: string;
}

const LABELS = ["key idea", "evidence", "question", "goal"];

export class AnnotationTool {
  readonly entries: AnnotationEntry[] = [];
  private counter = 0;
  private hidden = false;
  private pane: HTMLElement | null = null;

  constructor(
    private readonly recorder: EventRecorder,
    private readonly sidebar: HTMLElement,
    private readonly currentPage: () => string,
  ) {}

  mount(readingArea: HTMLElement): void {
    readingArea.addEventListener("mouseup", () => {
      const selection = window.getSelection();
      const text = selection ? selection.toString().trim() : "";
      if (text.length > 0) {
        this.showLabelPane(text, selection);
      }
    });
    this.renderSidebar();
  }

  private showLabelPane(text: string, selection: Selection | null): void {
    this.pane?.remove();
    const pane = document.createElement("div");
    pane.className = "annotation-pane";
    for (const label of LABELS) {
      const button = document.createElement("button");
      button.textContent = label;
      button.addEventListener("click", () => {
        this.createAnnotation(text, label, selection);
        pane.remove();
        this.pane = null;
      });
      pane.appendChild(button);
    }
    this.sidebar.appendChild(pane);
    this.pane = pane;
  }

  createAnnotation(text: string, label: string, selection: Selection | null): AnnotationEntry {
    this.counter += 1;
    const entry: AnnotationEntry = {
      id: `ann-${this.counter}`,
      text,
      label,
      note: "",
      pageUrl: this.currentPage(),
    };
    this.entries.push(entry);
    if (selection && selection.rangeCount > 0) {
      try {
        const mark = document.createElement("mark");
        mark.dataset.annotation = entry.id;
        selection.getRangeAt(0).surroundContents(mark);
      } catch {
        // selection crossed element boundaries; the entry still exists
      }
    }
    this.recorder.record("annotation_create", entry.pageUrl, {
      annotation_id: entry.id,
      text_length: text.length,
    });
    this.recorder.record("annotation_label", entry.pageUrl, {
      annotation_id: entry.id,
      label,
    });
    this.renderSidebar();
    return entry;
  }

  editNote(id: string, note: string): void {
    const entry = this.entries.find((e) => e.id === id);
    if (!entry) return;
    entry.note = note;
    this.recorder.record("annotation_edit", this.currentPage(), {
      annotation_id: id,
      note_length: note.length,
    });
  }

  read(id: string): void {
    this.recorder.record("annotation_read", this.currentPage(), { annotation_id: id });
  }

  remove(id: string): void {
    const index = this.entries.findIndex((e) => e.id === id);
    if (index < 0) return;
    this.entries.splice(index, 1);
    document.querySelector(`mark[data-annotation="${id}"]`)?.replaceWith(
      ...(document.querySelector(`mark[data-annotation="${id}"]`)?.childNodes ?? []),
    );
    this.recorder.record("annotation_delete", this.currentPage(), { annotation_id: id });
    this.renderSidebar();
  }

  search(terms: string): AnnotationEntry[] {
    this.recorder.record("annotation_search", this.currentPage(), { terms });
    const needle = terms.toLowerCase();
    return this.entries.filter(
      (e) =>
        e.text.toLowerCase().includes(needle) ||
        e.note.toLowerCase().includes(needle) ||
        e.label.toLowerCase().includes(needle),
    );
  }

  toggleHighlights(): void {
    this.hidden = !this.hidden;
    document.querySelectorAll("mark[data-annotation]").forEach((mark) => {
      (mark as HTMLElement).classList.toggle("mark-hidden", this.hidden);
    });
  }

  private renderSidebar(): void {
    let list = this.sidebar.querySelector<HTMLElement>(".annotation-list");
    if (!list) {
      list = document.createElement("div");
      list.className = "annotation-list";
      this.sidebar.appendChild(list);
    }
    list.innerHTML = "";
    for (const entry of this.entries) {
      const item = document.createElement("div");
      item.className = "annotation-item";
      item.dataset.id = entry.id;

      const head = document.createElement("button");
      head.className = "annotation-head";
      head.textContent = `[${entry.label}] ${entry.text.slice(0, 60)}`;
      head.addEventListener("click", () => this.read(entry.id));

      const note = document.createElement("input");
      note.className = "annotation-note";
      note.placeholder = "note...";
      note.value = entry.note;
      note.addEventListener("input", () => this.editNote(entry.id, note.value));

      const del = document.createElement("button");
      del.className = "annotation-delete";
      del.textContent = "x";
      del.addEventListener("click", () => this.remove(entry.id));

      item.append(head, note, del);
      list.appendChild(item);
    }
  }
}
