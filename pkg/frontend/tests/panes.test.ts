import { beforeEach, describe, expect, it } from "vitest";

import type { Api } from "../src/api.js";
import { BuilderView } from "../src/panes.js";
import type {
  Component,
  DevResponse,
  Progress,
  Project,
  SessionInfo,
} from "../src/types.js";
import { GRAMMAR } from "./grammar.test.js";

const PROJECT: Project = {
  id: "p1",
  name: "unit",
  description: "",
  template: "quiz",
  owner: "dev",
  created_at: 0,
};

class FakeApi {
  components: Record<Component, string> = {
    KB: "Quiz Bot: a game.",
    LOGIC: "1. Ask a question.\n2. Score it.",
    VARIABLES: "score: 0 {Initial value: 0, Update rule: Grow.}",
  };
  head = 3;
  events: [string, string][] = [];
  edits: [Component, string][] = [];
  restarts = 0;
  sessionCounter = 0;

  async grammar() {
    return GRAMMAR;
  }

  async representation() {
    return { version_index: this.head, components: { ...this.components } };
  }

  async versions() {
    return Array.from({ length: this.head + 1 }, (_, index) => ({
      index,
      provenance: index ? "DEV_UTTERANCE" : "TEMPLATE_INIT",
      event_id: null,
      created_at: 0,
    }));
  }

  async utter(_pid: string, text: string, onProgress: (p: Progress) => void):
      Promise<DevResponse> {
    onProgress({ request_id: "r", stage: "dev update call started", ordinal: 0 });
    onProgress({ request_id: "r", stage: "response received", ordinal: 1 });
    this.components.LOGIC += `\n3. ${text}`;
    this.head += 1;
    return {
      comprehension: `Understood: ${text}`,
      change_summary: `LOGIC +3: {+${text}+}`,
      new_version_index: this.head,
      delta: [{
        component: "LOGIC", old_ref: null, new_ref: 3,
        spans: [{ kind: "ADDED", tokens: text.split(" ") }],
      }],
      findings: [],
    };
  }

  async directEdit(_pid: string, component: Component, text: string):
      Promise<DevResponse> {
    this.edits.push([component, text]);
    this.components[component] = text;
    this.head += 1;
    return {
      comprehension: "",
      change_summary: "",
      new_version_index: this.head,
      delta: [],
      findings: [],
    };
  }

  async checkout(_pid: string, index: number) {
    return {
      version_index: index,
      components: { ...this.components, LOGIC: `1. Snapshot ${index}.` },
    };
  }

  async startSession(): Promise<SessionInfo> {
    this.sessionCounter += 1;
    return {
      session_id: `s${this.sessionCounter}`,
      project_id: "p1",
      version_index: this.head,
      history: [],
      variable_state: { score: "0" },
      started_at: 0,
    };
  }

  async sendMessage(_sid: string, text: string, onProgress: (p: Progress) => void) {
    onProgress({ request_id: "t", stage: "test reply call started", ordinal: 0 });
    return { reply: `echo ${text}`, variable_state: { score: "5" } };
  }

  async restart(): Promise<SessionInfo> {
    this.restarts += 1;
    return this.startSession();
  }

  async logEvent(_pid: string, kind: string, payload: string) {
    this.events.push([kind, payload]);
    return { event_id: "e" };
  }
}

async function mount(confirmAnswer = true) {
  const fake = new FakeApi();
  const root = document.createElement("div");
  document.body.appendChild(root);
  const view = new BuilderView(fake as unknown as Api, PROJECT, root, {
    confirmDiscard: () => confirmAnswer,
  });
  await view.load();
  return { fake, root, view };
}

function chatClasses(root: HTMLElement, role: string): string[] {
  const chat = root.querySelector(`[data-role="${role}"]`)!;
  return Array.from(chat.children).map((c) => c.className);
}

describe("BuilderView", () => {
  beforeEach(() => {
    document.body.innerHTML = "";
  });

  it("opens on the LOGIC tab with its text loaded", async () => {
    const { root, view } = await mount();
    expect(view.activeTab).toBe("LOGIC");
    const active = root.querySelector(".tab.active")!;
    expect(active.textContent).toBe("LOGIC");
    const editor = root.querySelector<HTMLTextAreaElement>('[data-role="editor"]')!;
    expect(editor.value).toContain("1. Ask a question.");
  });

  it("renders progress items before the reply bubble", async () => {
    const { root, view } = await mount();
    await view.sendUtterance("add a bonus round");
    const classes = chatClasses(root, "dev-chat");
    expect(classes[0]).toBe("msg user");
    expect(classes.filter((c) => c === "progress").length).toBeGreaterThanOrEqual(1);
    expect(classes[classes.length - 1]).toBe("msg bot");
    expect(classes.indexOf("progress")).toBeLessThan(classes.indexOf("msg bot"));
  });

  it("shows server-supplied add/remove highlighting after a response", async () => {
    const { root, view } = await mount();
    await view.sendUtterance("add a bonus round");
    const added = root.querySelectorAll('[data-role="delta-strip"] .diff-added');
    expect(added.length).toBe(1);
    expect(added[0].textContent).toBe("add a bonus round");
  });

  it("logs a REP_CLICK event for every tab switch", async () => {
    const { fake, view } = await mount();
    await view.switchTab("KB");
    await view.switchTab("VARIABLES");
    expect(fake.events).toContainEqual(["REP_CLICK", "KB"]);
    expect(fake.events).toContainEqual(["REP_CLICK", "VARIABLES"]);
  });

  it("keeps at most one dirty buffer and prompts before discarding", async () => {
    const { root, view } = await mount(false);
    const editor = root.querySelector<HTMLTextAreaElement>('[data-role="editor"]')!;
    editor.value = "1. Edited rule.";
    editor.dispatchEvent(new Event("input"));
    expect(view.dirtyTab).toBe("LOGIC");

    await view.switchTab("KB");  // confirm answers "no"
    expect(view.activeTab).toBe("LOGIC");
    expect(view.dirtyTab).toBe("LOGIC");
  });

  it("discards the dirty buffer when the prompt is accepted", async () => {
    const { root, view } = await mount(true);
    const editor = root.querySelector<HTMLTextAreaElement>('[data-role="editor"]')!;
    editor.value = "1. Edited rule.";
    editor.dispatchEvent(new Event("input"));

    await view.switchTab("KB");
    expect(view.activeTab).toBe("KB");
    expect(view.dirtyTab).toBeNull();
    await view.switchTab("LOGIC");
    expect(root.querySelector<HTMLTextAreaElement>('[data-role="editor"]')!.value)
      .toContain("1. Ask a question.");
  });

  it("rejects a malformed edit client-side with the line number", async () => {
    const { fake, root, view } = await mount();
    const editor = root.querySelector<HTMLTextAreaElement>('[data-role="editor"]')!;
    editor.value = "1. fine\nbroken line";
    editor.dispatchEvent(new Event("input"));
    await view.submitDirectEdit();

    const error = root.querySelector<HTMLElement>('[data-role="edit-error"]')!;
    expect(error.hidden).toBe(false);
    expect(error.textContent).toContain("line 2");
    expect(fake.edits).toHaveLength(0);  // no API mutation happened
  });

  it("submits a valid edit and clears the dirty marker", async () => {
    const { fake, root, view } = await mount();
    const editor = root.querySelector<HTMLTextAreaElement>('[data-role="editor"]')!;
    editor.value = "1. Only rule.";
    editor.dispatchEvent(new Event("input"));
    await view.submitDirectEdit();
    expect(fake.edits).toEqual([["LOGIC", "1. Only rule."]]);
    expect(view.dirtyTab).toBeNull();
  });

  it("restart empties the test pane and refreshes state", async () => {
    const { fake, root, view } = await mount();
    await view.sendTestMessage("hello");
    await view.sendTestMessage("again");
    expect(chatClasses(root, "test-chat").length).toBeGreaterThan(0);

    await view.restartSession();
    expect(fake.restarts).toBe(1);
    expect(chatClasses(root, "test-chat")).toHaveLength(0);
    const state = root.querySelector('[data-role="state-view"]')!;
    expect(state.textContent).toContain("score = 0");
  });

  it("selecting a version re-renders that snapshot", async () => {
    const { root, view } = await mount();
    await view.selectVersion(0);
    expect(view.selectedVersion).toBe(0);
    const editor = root.querySelector<HTMLTextAreaElement>('[data-role="editor"]')!;
    expect(editor.value).toBe("1. Snapshot 0.");
  });
});
