// Client-side mirror of the canonical component grammar.
//
// The patterns come from the same grammar description the backend core
// compiles (served at GET /grammar), so the two sides cannot drift. Lines
// are right-trimmed before matching, as on the server.

import type { Component, Grammar } from "./types.js";

export interface GrammarIssue {
  line: number;
  message: string;
}

export class GrammarMirror {
  private logicLine: RegExp;
  private variableLine: RegExp;
  private kbHeadLine: RegExp;

  constructor(grammar: Grammar) {
    this.logicLine = new RegExp(grammar.logic_line);
    this.variableLine = new RegExp(grammar.variable_line);
    this.kbHeadLine = new RegExp(grammar.kb_head_line);
  }

  /** First grammar problem in a component text, or null when it parses. */
  check(component: Component, text: string): GrammarIssue | null {
    const lines = text.split("\n").map((l) => l.replace(/\s+$/, ""));
    if (component === "KB") return this.checkKb(lines);
    const pattern = component === "LOGIC" ? this.logicLine : this.variableLine;
    const expected =
      component === "LOGIC"
        ? "expected '<n>. <rule>'"
        : "expected 'name: value {Initial value: ..., Update rule: ...}'";
    for (let i = 0; i < lines.length; i++) {
      if (lines[i] && !pattern.test(lines[i])) {
        return { line: i + 1, message: expected };
      }
    }
    return null;
  }

  private checkKb(lines: string[]): GrammarIssue | null {
    let blockStart: number | null = null;
    for (let i = 0; i < lines.length; i++) {
      if (!lines[i]) {
        blockStart = null;
        continue;
      }
      if (blockStart === null) {
        blockStart = i;
        if (!this.kbHeadLine.test(lines[i])) {
          return { line: i + 1, message: "expected 'key: value'" };
        }
      }
    }
    return null;
  }
}
