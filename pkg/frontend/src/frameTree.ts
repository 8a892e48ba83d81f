/**
 * Layout helpers that turn server-computed diff segments into an indented
 * tree rendering of a bracketed frame.
 *
 * Segments arrive as (text, highlight) slices whose concatenation is the
 * canonical serialization of one side of the diff. Splitting on single
 * spaces recovers the serialization's parts exactly, so the tree can be
 * re-flowed onto indented lines without ever parsing bracket syntax:
 * joining every token back with single spaces reproduces the input, and
 * joining one segment's tokens reproduces that segment's highlight span.
 */

import type { Segment } from "./api.js";

export interface FrameToken {
  text: string;
  /** Index of the source segment, so highlight spans stay recoverable. */
  segment: number;
  highlight: boolean;
}

export interface FrameLine {
  depth: number;
  tokens: FrameToken[];
}

function isOpener(text: string): boolean {
  return text.startsWith("[IN:") || text.startsWith("[SL:");
}

/** Split segments into tokens, tagging each with its source segment. */
export function tokenizeSegments(segments: Segment[]): FrameToken[] {
  const tokens: FrameToken[] = [];
  segments.forEach((segment, index) => {
    for (const text of segment.text.split(" ")) {
      // boundary slices carry edge spaces; skip the empty pieces they leave
      if (text === "") continue;
      tokens.push({ text, segment: index, highlight: segment.highlight });
    }
  });
  return tokens;
}

/**
 * Flow tokens onto indented lines: each nested frame or slot opens on its
 * own line, and a closing bracket stays inline unless its subtree wrapped.
 */
export function layoutTokens(tokens: FrameToken[]): FrameLine[] {
  const lines: FrameLine[] = [{ depth: 0, tokens: [] }];
  const wrapped: boolean[] = [];

  const current = (): FrameLine => lines[lines.length - 1]!;
  const newline = (depth: number): void => {
    if (current().tokens.length === 0) {
      current().depth = depth;
    } else {
      lines.push({ depth, tokens: [] });
    }
    wrapped.fill(true);
  };

  for (const token of tokens) {
    if (isOpener(token.text)) {
      if (current().tokens.length > 0) newline(wrapped.length);
      current().tokens.push(token);
      wrapped.push(false);
    } else if (token.text === "]") {
      if (wrapped[wrapped.length - 1]) newline(wrapped.length - 1);
      current().tokens.push(token);
      wrapped.pop();
    } else {
      // a plain token after a closed sibling starts its own line
      const line = current();
      if (line.tokens[line.tokens.length - 1]?.text === "]") {
        newline(wrapped.length);
      }
      current().tokens.push(token);
    }
  }
  return lines;
}

/** Reassemble the canonical serialization the segments were sliced from. */
export function reassemble(tokens: FrameToken[]): string {
  return tokens.map((token) => token.text).join(" ");
}

/** Exact text of each highlighted span, one entry per highlighted segment. */
export function highlightedSpans(tokens: FrameToken[]): string[] {
  const bySegment = new Map<number, string[]>();
  for (const token of tokens) {
    if (!token.highlight) continue;
    const parts = bySegment.get(token.segment);
    if (parts) {
      parts.push(token.text);
    } else {
      bySegment.set(token.segment, [token.text]);
    }
  }
  return [...bySegment.values()].map((parts) => parts.join(" "));
}
