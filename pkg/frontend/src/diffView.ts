/**
 * Side-by-side diff rendering: expected parse on the left, predicted on the
 * right, with the server's highlight spans marked on both the frame tree
 * and the raw utterance. A Match verdict renders no highlights at all.
 */

import type { BugDiff, Finding, Segment } from "./api.js";
import { layoutTokens, tokenizeSegments } from "./frameTree.js";

export type DiffSide = "expected" | "predicted";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function describeFinding(finding: Finding): string {
  const where = finding.slot_label
    ? `slot ${finding.slot_label}`
    : [finding.expected_label, finding.predicted_label]
        .filter((label) => label !== null)
        .join(" vs ");
  const spans: string[] = [];
  if (finding.expected_span) {
    spans.push(`expected tokens [${finding.expected_span.join(", ")})`);
  }
  if (finding.predicted_span) {
    spans.push(`predicted tokens [${finding.predicted_span.join(", ")})`);
  }
  const suffix = spans.length > 0 ? ` at ${spans.join(", ")}` : "";
  return `${finding.kind}: ${where}${suffix}`;
}

function renderUtterance(
  doc: Document,
  tokens: string[],
  spans: [number, number][],
): HTMLElement {
  const row = el(doc, "div", "utt");
  tokens.forEach((text, index) => {
    const inSpan = spans.some(([start, end]) => index >= start && index < end);
    const tok = el(doc, "span", inSpan ? "tok hl" : "tok", text);
    tok.dataset.idx = String(index);
    row.appendChild(tok);
  });
  return row;
}

function renderFrameTree(doc: Document, segments: Segment[]): HTMLElement {
  const tree = el(doc, "div", "frame-tree");
  for (const line of layoutTokens(tokenizeSegments(segments))) {
    const row = el(doc, "div", "frame-line");
    row.style.paddingLeft = `${line.depth * 1.25}rem`;
    for (const token of line.tokens) {
      const tok = el(doc, "span", token.highlight ? "tok hl" : "tok", token.text);
      tok.dataset.seg = String(token.segment);
      row.appendChild(tok);
    }
    tree.appendChild(row);
  }
  return tree;
}

function renderSide(
  doc: Document,
  side: DiffSide,
  diff: BugDiff,
): HTMLElement {
  const panel = el(doc, "section", "diff-side");
  panel.dataset.side = side;
  panel.appendChild(el(doc, "h3", undefined, side));
  const spans =
    side === "expected" ? diff.expected_token_spans : diff.predicted_token_spans;
  const segments =
    side === "expected" ? diff.expected_segments : diff.predicted_segments;
  panel.appendChild(renderUtterance(doc, diff.tokens, spans));
  panel.appendChild(renderFrameTree(doc, segments));
  return panel;
}

export function renderDiffView(container: HTMLElement, diff: BugDiff): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  container.classList.add("diff-view");

  const header = el(doc, "div", "diff-header");
  const badge = el(doc, "span", `verdict verdict-${diff.verdict}`, diff.verdict);
  header.appendChild(badge);
  if (diff.findings.length === 0) {
    header.appendChild(el(doc, "span", "no-findings", "parses agree"));
  }
  container.appendChild(header);

  if (diff.findings.length > 0) {
    const list = el(doc, "ul", "findings");
    for (const finding of diff.findings) {
      list.appendChild(el(doc, "li", "finding", describeFinding(finding)));
    }
    container.appendChild(list);
  }

  const sides = el(doc, "div", "diff-sides");
  sides.appendChild(renderSide(doc, "expected", diff));
  sides.appendChild(renderSide(doc, "predicted", diff));
  container.appendChild(sides);
}

export function renderNotFound(container: HTMLElement, bugId: string): void {
  const doc = container.ownerDocument;
  container.textContent = "";
  const box = el(doc, "div", "not-found");
  box.appendChild(el(doc, "h3", undefined, "Bug not found"));
  box.appendChild(
    el(doc, "p", undefined, `No bug with id ${bugId} exists in the ledger.`),
  );
  container.appendChild(box);
}

/**
 * Exact text of every highlighted span on one rendered side, one string per
 * server segment. Tests compare these against the API payload.
 */
export function highlightedSpanTexts(
  container: HTMLElement,
  side: DiffSide,
): string[] {
  const panel = container.querySelector(`.diff-side[data-side="${side}"]`);
  if (!panel) return [];
  const bySegment = new Map<string, string[]>();
  for (const tok of panel.querySelectorAll(".frame-tree .tok.hl")) {
    const seg = (tok as HTMLElement).dataset.seg ?? "";
    const parts = bySegment.get(seg);
    if (parts) {
      parts.push(tok.textContent ?? "");
    } else {
      bySegment.set(seg, [tok.textContent ?? ""]);
    }
  }
  return [...bySegment.values()].map((parts) => parts.join(" "));
}

/** Utterance tokens highlighted on one side, joined into phrases per run. */
export function highlightedUtterancePhrases(
  container: HTMLElement,
  side: DiffSide,
): string[] {
  const panel = container.querySelector(`.diff-side[data-side="${side}"]`);
  if (!panel) return [];
  const phrases: string[] = [];
  let run: string[] = [];
  for (const tok of panel.querySelectorAll(".utt .tok")) {
    if (tok.classList.contains("hl")) {
      run.push(tok.textContent ?? "");
    } else if (run.length > 0) {
      phrases.push(run.join(" "));
      run = [];
    }
  }
  if (run.length > 0) phrases.push(run.join(" "));
  return phrases;
}
