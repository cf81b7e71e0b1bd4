// Renders server-supplied representation deltas as DOM.
//
// Highlighting is never recomputed client-side: the spans arrive from the
// API (one source of truth) and are translated 1:1 into styled elements -
// additions emphasized, removals struck through.

import type { DiffSpan, ElementChange } from "./types.js";

function spanNode(doc: Document, span: DiffSpan): HTMLElement {
  const el = doc.createElement("span");
  el.textContent = span.tokens.join(" ");
  if (span.kind === "ADDED") el.className = "diff-added";
  else if (span.kind === "REMOVED") el.className = "diff-removed";
  else el.className = "diff-unchanged";
  return el;
}

export function changeLabel(change: ElementChange): string {
  if (change.old_ref === null) return `${change.component} +${change.new_ref}`;
  if (change.new_ref === null) return `${change.component} -${change.old_ref}`;
  if (change.old_ref !== change.new_ref) {
    return `${change.component} ${change.old_ref}->${change.new_ref}`;
  }
  return `${change.component} ${change.old_ref}`;
}

export function renderChange(doc: Document, change: ElementChange): HTMLElement {
  const row = doc.createElement("div");
  row.className = "delta-change";
  row.dataset.component = change.component;
  const label = doc.createElement("span");
  label.className = "delta-label";
  label.textContent = changeLabel(change) + ": ";
  row.appendChild(label);
  change.spans.forEach((span, i) => {
    if (i > 0) row.appendChild(doc.createTextNode(" "));
    row.appendChild(spanNode(doc, span));
  });
  return row;
}

export function renderDelta(doc: Document, delta: ElementChange[]): HTMLElement {
  const box = doc.createElement("div");
  box.className = "delta";
  if (!delta.length) return box;
  for (const change of delta) box.appendChild(renderChange(doc, change));
  return box;
}
