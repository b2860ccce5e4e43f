/**
 * DiffSpan rendering: inserts green, deletes red struck-through,
 * equal text plain.
 */

import type { DiffSpan } from "./api.js";

export function renderDiff(doc: Document, spans: DiffSpan[]): HTMLElement {
  const container = doc.createElement("div");
  container.className = "diff";
  for (const span of spans) {
    if (span.kind === "equal") {
      container.append(doc.createTextNode(span.text));
    } else {
      const el = doc.createElement(span.kind === "insert" ? "ins" : "del");
      el.className = span.kind === "insert" ? "diff-insert" : "diff-delete";
      el.textContent = span.text;
      container.append(el);
    }
  }
  return container;
}
