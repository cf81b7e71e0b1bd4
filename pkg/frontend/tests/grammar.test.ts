import { describe, expect, it } from "vitest";

import { GrammarMirror } from "../src/grammar.js";
import type { Grammar } from "../src/types.js";

// Mirror of src/chatwright/grammar.json; the integration test fetches the
// served copy and cross-checks these patterns against it.
export const GRAMMAR: Grammar = {
  logic_line: "^(\\d+)\\. +(.*)$",
  variable_line:
    "^([A-Za-z_][A-Za-z0-9_]*): (.*?) \\{Initial value: (.*?), Update rule: (.*)\\}$",
  kb_head_line: "^([^:]+):(.*)$",
  document_headers: { KB: "[KB]", LOGIC: "[Logic]", VARIABLES: "[Variables]" },
};

describe("GrammarMirror", () => {
  const mirror = new GrammarMirror(GRAMMAR);

  it("accepts canonical logic text", () => {
    expect(mirror.check("LOGIC", "1. Ask a question.\n2. Score it.")).toBeNull();
  });

  it("rejects a malformed logic line with its number", () => {
    const issue = mirror.check("LOGIC", "1. fine\nnot numbered");
    expect(issue).toEqual({ line: 2, message: "expected '<n>. <rule>'" });
  });

  it("accepts canonical variable lines", () => {
    const text =
      "score: 0 {Initial value: 0, Update rule: Increase by 10 per correct answer.}";
    expect(mirror.check("VARIABLES", text)).toBeNull();
  });

  it("rejects a variable line missing the braces", () => {
    const issue = mirror.check("VARIABLES", "score 0");
    expect(issue?.line).toBe(1);
  });

  it("checks only the first line of each KB block", () => {
    const ok = "Intro: line one\ncontinuation: with colon\n\nOther: x";
    expect(mirror.check("KB", ok)).toBeNull();
    const bad = "Intro: fine\n\nno colon here";
    expect(mirror.check("KB", bad)?.line).toBe(3);
  });

  it("treats blank and trailing-whitespace lines like the server", () => {
    expect(mirror.check("LOGIC", "")).toBeNull();
    expect(mirror.check("LOGIC", "1. rule   \n")).toBeNull();
  });
});
