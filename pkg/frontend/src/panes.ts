// The three-pane builder: dev-bot chat, representation tabs, test-bot chat.
//
// Pane-state rules enforced here:
//   - the LOGIC tab is the default view,
//   - at most one tab holds a dirty (unsaved) buffer; switching away from
//     it prompts before discarding,
//   - inputs are disabled while a mutation streams (one in-flight mutation
//     per project), progress items render before the reply bubble,
//   - every tab click and every bot reply is reported to POST /events,
//   - all state changes go through the documented API; nothing is mutated
//     locally.

import { Api, ApiError } from "./api.js";
import { renderDelta } from "./diffview.js";
import { GrammarMirror } from "./grammar.js";
import type {
  Component,
  DevResponse,
  Progress,
  Project,
  SessionInfo,
} from "./types.js";
import { COMPONENTS } from "./types.js";

export interface BuilderOptions {
  confirmDiscard?: (message: string) => boolean;
}

export class BuilderView {
  activeTab: Component = "LOGIC";
  dirtyTab: Component | null = null;
  selectedVersion = 0;
  session: SessionInfo | null = null;
  busy = false;

  private doc: Document;
  private buffers: Record<Component, string> = { KB: "", LOGIC: "", VARIABLES: "" };
  private serverTexts: Record<Component, string> = { KB: "", LOGIC: "", VARIABLES: "" };
  private grammar: GrammarMirror | null = null;
  private confirmDiscard: (message: string) => boolean;

  constructor(
    private api: Api,
    private project: Project,
    private root: HTMLElement,
    options: BuilderOptions = {},
  ) {
    this.doc = root.ownerDocument;
    this.confirmDiscard =
      options.confirmDiscard ??
      ((message) => globalThis.confirm?.(message) ?? true);
  }

  // -- boot ------------------------------------------------------------------

  async load(): Promise<void> {
    this.root.innerHTML = `
      <div class="builder">
        <section class="pane dev-pane">
          <h2>Dev bot</h2>
          <div class="chat" data-role="dev-chat"></div>
          <form data-role="dev-form">
            <input data-role="dev-input" placeholder="Tell the dev-bot what to build..." />
            <button type="submit">Send</button>
          </form>
        </section>
        <section class="pane rep-pane">
          <header class="rep-header">
            <nav data-role="tabs"></nav>
            <label>Version
              <select data-role="versions"></select>
            </label>
          </header>
          <textarea data-role="editor" spellcheck="false"></textarea>
          <div class="edit-error" data-role="edit-error" hidden></div>
          <div class="rep-actions">
            <button data-role="save-edit">Save edit</button>
          </div>
          <div class="delta-strip" data-role="delta-strip"></div>
        </section>
        <section class="pane test-pane">
          <h2>Test bot <button data-role="restart">Restart</button></h2>
          <div class="chat" data-role="test-chat"></div>
          <div class="state-view" data-role="state-view"></div>
          <form data-role="test-form">
            <input data-role="test-input" placeholder="Talk to your bot..." />
            <button type="submit">Send</button>
          </form>
        </section>
      </div>`;

    this.grammar = new GrammarMirror(await this.api.grammar());
    await this.refreshRepresentation();
    await this.refreshVersions();
    this.renderTabs();
    this.wireEvents();
  }

  private el<T extends HTMLElement>(role: string): T {
    const found = this.root.querySelector(`[data-role="${role}"]`);
    if (!found) throw new Error(`missing element ${role}`);
    return found as T;
  }

  private wireEvents(): void {
    this.el<HTMLFormElement>("dev-form").addEventListener("submit", (e) => {
      e.preventDefault();
      const input = this.el<HTMLInputElement>("dev-input");
      const text = input.value.trim();
      if (text) {
        input.value = "";
        void this.sendUtterance(text);
      }
    });
    this.el<HTMLFormElement>("test-form").addEventListener("submit", (e) => {
      e.preventDefault();
      const input = this.el<HTMLInputElement>("test-input");
      const text = input.value.trim();
      if (text) {
        input.value = "";
        void this.sendTestMessage(text);
      }
    });
    this.el<HTMLButtonElement>("save-edit").addEventListener("click", () => {
      void this.submitDirectEdit();
    });
    this.el<HTMLButtonElement>("restart").addEventListener("click", () => {
      void this.restartSession();
    });
    this.el<HTMLSelectElement>("versions").addEventListener("change", () => {
      const index = Number(this.el<HTMLSelectElement>("versions").value);
      void this.selectVersion(index);
    });
    this.el<HTMLTextAreaElement>("editor").addEventListener("input", () => {
      this.buffers[this.activeTab] = this.el<HTMLTextAreaElement>("editor").value;
      this.dirtyTab =
        this.buffers[this.activeTab] !== this.serverTexts[this.activeTab]
          ? this.activeTab
          : null;
      this.renderTabs();
    });
  }

  // -- representation pane ------------------------------------------------------

  private renderTabs(): void {
    const nav = this.el<HTMLElement>("tabs");
    nav.innerHTML = "";
    for (const component of COMPONENTS) {
      const button = this.doc.createElement("button");
      button.type = "button";
      button.dataset.tab = component;
      button.textContent =
        component + (this.dirtyTab === component ? " *" : "");
      button.className = component === this.activeTab ? "tab active" : "tab";
      button.addEventListener("click", () => {
        void this.switchTab(component);
      });
      nav.appendChild(button);
    }
  }

  async switchTab(target: Component): Promise<void> {
    if (target !== this.activeTab && this.dirtyTab && this.dirtyTab !== target) {
      const discard = this.confirmDiscard(
        `Discard your unsaved ${this.dirtyTab} edit?`);
      if (!discard) return;
      this.buffers[this.dirtyTab] = this.serverTexts[this.dirtyTab];
      this.dirtyTab = null;
    }
    this.activeTab = target;
    this.renderTabs();
    this.renderEditor();
    await this.api.logEvent(this.project.id, "REP_CLICK", target);
  }

  private renderEditor(): void {
    this.el<HTMLTextAreaElement>("editor").value = this.buffers[this.activeTab];
    const error = this.el<HTMLElement>("edit-error");
    error.hidden = true;
    error.textContent = "";
  }

  private async refreshRepresentation(): Promise<void> {
    const view = await this.api.representation(this.project.id);
    this.selectedVersion = view.version_index;
    for (const component of COMPONENTS) {
      this.serverTexts[component] = view.components[component];
      if (this.dirtyTab !== component) {
        this.buffers[component] = view.components[component];
      }
    }
    this.renderEditor();
  }

  private async refreshVersions(): Promise<void> {
    const versions = await this.api.versions(this.project.id);
    const select = this.el<HTMLSelectElement>("versions");
    select.innerHTML = "";
    for (const v of versions) {
      const option = this.doc.createElement("option");
      option.value = String(v.index);
      option.textContent = `v${v.index} (${v.provenance})`;
      select.appendChild(option);
    }
    select.value = String(this.selectedVersion);
  }

  private showDelta(response: DevResponse): void {
    const strip = this.el<HTMLElement>("delta-strip");
    strip.innerHTML = "";
    strip.appendChild(renderDelta(this.doc, response.delta));
  }

  private setBusy(busy: boolean): void {
    this.busy = busy;
    for (const role of ["dev-input", "test-input"]) {
      this.el<HTMLInputElement>(role).disabled = busy;
    }
    this.el<HTMLButtonElement>("save-edit").disabled = busy;
  }

  private showEditError(message: string): void {
    const error = this.el<HTMLElement>("edit-error");
    error.hidden = false;
    error.textContent = message;
    const match = /line (\d+)/.exec(message);
    if (match) {
      const line = Number(match[1]);
      const editor = this.el<HTMLTextAreaElement>("editor");
      const lines = editor.value.split("\n");
      const start = lines.slice(0, line - 1).join("\n").length + (line > 1 ? 1 : 0);
      editor.focus?.();
      editor.setSelectionRange?.(start, start + (lines[line - 1]?.length ?? 0));
    }
  }

  // -- chat panes ---------------------------------------------------------------

  private bubble(chat: HTMLElement, className: string, text: string): HTMLElement {
    const node = this.doc.createElement("div");
    node.className = className;
    node.textContent = text;
    chat.appendChild(node);
    chat.scrollTop = chat.scrollHeight;
    return node;
  }

  private progressItem(chat: HTMLElement, progress: Progress): void {
    this.bubble(chat, "progress", `… ${progress.stage}`);
  }

  async sendUtterance(text: string): Promise<void> {
    if (this.busy) return;
    const chat = this.el<HTMLElement>("dev-chat");
    this.bubble(chat, "msg user", text);
    this.setBusy(true);
    try {
      const response = await this.api.utter(this.project.id, text, (p) =>
        this.progressItem(chat, p));
      const summary = response.change_summary
        ? `${response.comprehension}\n\n${response.change_summary}`
        : response.comprehension || "(no change)";
      this.bubble(chat, "msg bot", summary);
      this.showDelta(response);
      await this.refreshRepresentation();
      await this.refreshVersions();
      await this.api.logEvent(this.project.id, "DEV_RESP", response.comprehension);
    } catch (err) {
      this.bubble(chat, "msg error", this.describe(err));
    } finally {
      this.setBusy(false);
    }
  }

  async submitDirectEdit(): Promise<void> {
    if (this.busy || this.dirtyTab === null) return;
    const component = this.dirtyTab;
    const text = this.buffers[component];

    const issue = this.grammar?.check(component, text);
    if (issue) {
      this.showEditError(`line ${issue.line}: ${issue.message}`);
      return;
    }

    // Conflict guard: someone (another tab, the dev-bot) may have moved the
    // head while we were typing.
    const head = await this.api.representation(this.project.id);
    if (head.version_index !== this.selectedVersion) {
      this.showEditError(
        "A newer version was committed meanwhile; reload before editing.");
      return;
    }

    this.setBusy(true);
    try {
      const response = await this.api.directEdit(this.project.id, component, text);
      this.dirtyTab = null;
      this.showDelta(response);
      await this.refreshRepresentation();
      await this.refreshVersions();
      this.renderTabs();
    } catch (err) {
      if (err instanceof ApiError && err.status === 422) {
        this.showEditError(err.detail);
      } else {
        this.showEditError(this.describe(err));
      }
    } finally {
      this.setBusy(false);
    }
  }

  async selectVersion(index: number): Promise<void> {
    const view = await this.api.checkout(this.project.id, index);
    this.selectedVersion = view.version_index;
    for (const component of COMPONENTS) {
      this.serverTexts[component] = view.components[component];
      this.buffers[component] = view.components[component];
    }
    this.dirtyTab = null;
    this.renderTabs();
    this.renderEditor();
    this.el<HTMLElement>("delta-strip").innerHTML = "";
    this.el<HTMLSelectElement>("versions").value = String(index);
    // Running test sessions stay bound to their own version; a new session
    // picks up this one.
  }

  private renderState(state: Record<string, string>): void {
    const view = this.el<HTMLElement>("state-view");
    view.innerHTML = "";
    for (const [name, value] of Object.entries(state)) {
      const row = this.doc.createElement("div");
      row.className = "state-row";
      row.textContent = `${name} = ${value}`;
      view.appendChild(row);
    }
  }

  private async ensureSession(): Promise<SessionInfo> {
    if (!this.session) {
      this.session = await this.api.startSession(this.project.id);
      this.renderState(this.session.variable_state);
    }
    return this.session;
  }

  async sendTestMessage(text: string): Promise<void> {
    if (this.busy) return;
    const chat = this.el<HTMLElement>("test-chat");
    const session = await this.ensureSession();
    this.bubble(chat, "msg user", text);
    this.setBusy(true);
    try {
      const reply = await this.api.sendMessage(session.session_id, text, (p) =>
        this.progressItem(chat, p));
      this.bubble(chat, "msg bot", reply.reply);
      this.renderState(reply.variable_state);
      await this.api.logEvent(this.project.id, "TEST_RESP", reply.reply);
    } catch (err) {
      this.bubble(chat, "msg error", this.describe(err));
    } finally {
      this.setBusy(false);
    }
  }

  async restartSession(): Promise<void> {
    if (!this.session) return;
    this.session = await this.api.restart(this.session.session_id);
    this.el<HTMLElement>("test-chat").innerHTML = "";
    this.renderState(this.session.variable_state);
  }

  private describe(err: unknown): string {
    if (err instanceof ApiError) return err.detail;
    return err instanceof Error ? err.message : String(err);
  }
}
