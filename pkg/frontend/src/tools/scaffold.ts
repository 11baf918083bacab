/**
 * Scaffold popup and to-do list. Renders engine responses as a modal over a
 * shadowed backdrop: the prompt message plus four options of which only the
 * enabled ones are selectable. Confirming turns the checked options into a
 * to-do list whose items can be ticked off and reordered. Every display,
 * selection, and list interaction goes to the engine's interaction endpoint,
 * which also puts it on the trace.
 */

import { ScaffoldClient } from "../api.js";
import { ScaffoldResponseWire } from "../contract.js";

export class ScaffoldUI {
  private shownScaffolds = new Set<number>();
  private backdrop: HTMLElement | null = null;
  private checked: string[] = [];
  private todoItems: { optionId: string; text: string; done: boolean }[] = [];
  private current: ScaffoldResponseWire | null = null;

  constructor(
    private readonly client: ScaffoldClient,
    private readonly container: HTMLElement,
    private readonly clock: () => number,
    private readonly onDiagnostic: (message: string) => void = () => {},
  ) {}

  /** Poll the engine once; renders when a new scaffold arrives. */
  async poll(): Promise<void> {
    let response: ScaffoldResponseWire | null;
    try {
      response = await this.client.request(this.clock());
    } catch (error) {
      this.onDiagnostic(`scaffold poll failed: ${String(error)}`);
      return;
    }
    if (!response || this.shownScaffolds.has(response.scaffold_id)) {
      return;
    }
    this.shownScaffolds.add(response.scaffold_id);
    if (response.omitted) {
      return; // every option already satisfied: no popup at all
    }
    this.render(response);
  }

  render(response: ScaffoldResponseWire): void {
    if (!isWellFormed(response)) {
      this.onDiagnostic("malformed scaffold response suppressed");
      return;
    }
    this.closePopup(false);
    this.current = response;
    this.checked = [];

    const backdrop = document.createElement("div");
    backdrop.className = "scaffold-backdrop";
    const popup = document.createElement("div");
    popup.className = "scaffold-popup";

    const message = document.createElement("p");
    message.className = "scaffold-message";
    message.textContent = response.message;
    popup.appendChild(message);

    const list = document.createElement("div");
    list.className = "scaffold-options";
    for (const option of response.options) {
      const row = document.createElement("label");
      row.className = "scaffold-option";
      const box = document.createElement("input");
      box.type = "checkbox";
      box.value = option.id;
      box.disabled = !option.enabled;
      if (!option.enabled) {
        row.classList.add("scaffold-option-disabled");
      }
      box.addEventListener("change", () => {
        void this.toggleOption(option.id, box.checked);
      });
      const text = document.createElement("span");
      text.textContent = `(${option.id}) ${option.text}`;
      row.append(box, text);
      list.appendChild(row);
    }
    popup.appendChild(list);

    const confirm = document.createElement("button");
    confirm.className = "scaffold-confirm";
    confirm.textContent = "Create to-do list";
    confirm.addEventListener("click", () => void this.confirm());
    const dismiss = document.createElement("button");
    dismiss.className = "scaffold-dismiss";
    dismiss.textContent = "Close";
    dismiss.addEventListener("click", () => void this.dismiss());
    popup.append(confirm, dismiss);

    backdrop.appendChild(popup);
    this.container.appendChild(backdrop);
    this.backdrop = backdrop;
    void this.interact("Message_Displayed");
  }

  private async toggleOption(optionId: string, selected: boolean): Promise<void> {
    if (selected) {
      if (!this.checked.includes(optionId)) this.checked.push(optionId);
      await this.interact("MessageOption_Checked", { option_id: optionId });
    } else {
      this.checked = this.checked.filter((id) => id !== optionId);
      await this.interact("MessageOption_UnChecked", { option_id: optionId });
    }
  }

  private async confirm(): Promise<void> {
    if (!this.current) return;
    const options = this.current.options;
    this.todoItems = this.checked.map((id) => ({
      optionId: id,
      text: options.find((o) => o.id === id)?.text ?? id,
      done: false,
    }));
    await this.interact("CreateChecklist");
    this.closePopup(false);
    this.renderTodo();
    await this.interact("CurrToDoList_Displayed");
  }

  private async dismiss(): Promise<void> {
    this.closePopup(false);
    await this.interact("Message_Closed");
  }

  private closePopup(emit: boolean): void {
    this.backdrop?.remove();
    this.backdrop = null;
    if (emit) void this.interact("Message_Closed");
  }

  private renderTodo(): void {
    this.container.querySelector(".todo-list")?.remove();
    if (this.todoItems.length === 0) return;
    const list = document.createElement("div");
    list.className = "todo-list";
    this.todoItems.forEach((item, index) => {
      const row = document.createElement("div");
      row.className = "todo-item";
      const box = document.createElement("input");
      box.type = "checkbox";
      box.checked = item.done;
      box.addEventListener("change", () => {
        item.done = box.checked;
        void this.interact(
          box.checked ? "CurrToDoListItem_Checked" : "CurrToDoListItem_UnChecked",
          { option_id: item.optionId },
        );
      });
      const text = document.createElement("span");
      text.textContent = item.text;
      const up = document.createElement("button");
      up.textContent = "↑";
      up.addEventListener("click", () => void this.moveUp(index));
      row.append(box, text, up);
      list.appendChild(row);
    });
    this.container.appendChild(list);
  }

  private async moveUp(index: number): Promise<void> {
    if (index <= 0) return;
    const [item] = this.todoItems.splice(index, 1);
    this.todoItems.splice(index - 1, 0, item);
    this.renderTodo();
    await this.interact("CurrToDoList_Re-Ordered", {
      order: this.todoItems.map((i) => i.optionId),
    });
  }

  private async interact(
    subAction: Parameters<ScaffoldClient["interact"]>[0]["sub_action"],
    extra: { option_id?: string; order?: string[] } = {},
  ): Promise<void> {
    if (!this.current) return;
    try {
      await this.client.interact({
        sub_action: subAction,
        elapsed_ms: Math.round(this.clock()),
        scaffold_id: this.current.scaffold_id,
        ...extra,
      });
    } catch (error) {
      this.onDiagnostic(`interaction failed: ${String(error)}`);
    }
  }
}

function isWellFormed(response: ScaffoldResponseWire): boolean {
  return (
    typeof response.scaffold_id === "number" &&
    typeof response.message === "string" &&
    Array.isArray(response.options) &&
    response.options.every(
      (o) => typeof o.id === "string" && typeof o.text === "string" &&
        typeof o.enabled === "boolean",
    )
  );
}
