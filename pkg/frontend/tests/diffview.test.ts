import { describe, expect, it } from "vitest";

import { changeLabel, renderDelta } from "../src/diffview.js";
import type { ElementChange } from "../src/types.js";

const EDIT_CHANGE: ElementChange = {
  component: "LOGIC",
  old_ref: 1,
  new_ref: 1,
  spans: [
    { kind: "UNCHANGED", tokens: ["For", "each", "continent,", "give"] },
    { kind: "REMOVED", tokens: ["20"] },
    { kind: "ADDED", tokens: ["5"] },
    { kind: "UNCHANGED", tokens: ["questions", "to", "the", "user."] },
  ],
};

describe("renderDelta", () => {
  it("marks additions emphasized and removals struck through", () => {
    const box = renderDelta(document, [EDIT_CHANGE]);
    const added = box.querySelectorAll(".diff-added");
    const removed = box.querySelectorAll(".diff-removed");
    expect(added).toHaveLength(1);
    expect(removed).toHaveLength(1);
    expect(added[0].textContent).toBe("5");
    expect(removed[0].textContent).toBe("20");
  });

  it("keeps unchanged context readable", () => {
    const box = renderDelta(document, [EDIT_CHANGE]);
    expect(box.textContent).toContain("For each continent, give");
    expect(box.textContent).toContain("questions to the user.");
  });

  it("renders nothing for an empty delta", () => {
    const box = renderDelta(document, []);
    expect(box.children).toHaveLength(0);
  });

  it("labels insertions, deletions, and moves", () => {
    expect(changeLabel({ component: "LOGIC", old_ref: null, new_ref: 4, spans: [] }))
      .toBe("LOGIC +4");
    expect(changeLabel({ component: "LOGIC", old_ref: 9, new_ref: null, spans: [] }))
      .toBe("LOGIC -9");
    expect(changeLabel({ component: "KB", old_ref: "Quiz Bot", new_ref: "Quiz Bot", spans: [] }))
      .toBe("KB Quiz Bot");
    expect(changeLabel({ component: "LOGIC", old_ref: 4, new_ref: 3, spans: [] }))
      .toBe("LOGIC 4->3");
  });
});
