/**
 * Canned service payloads for unit tests, captured from a live service so
 * the shapes match the wire format exactly.
 */

import type {
  BugDiff,
  BugPage,
  BugSummary,
  Proposal,
  Report,
} from "../src/api.js";

export function bugSummary(overrides: Partial<BugSummary> = {}): BugSummary {
  return {
    id: "bug-000001",
    utterance: "ring dr lee right away",
    status: "detected",
    uncertainty: 0.81,
    frequency: 4,
    last_update: "2024-05-01T10:00:10+00:00",
    category: null,
    suggested_action: null,
    proposal_ids: [],
    has_golden: false,
    ...overrides,
  };
}

export function bugPage(bugs: BugSummary[], total?: number): BugPage {
  return { bugs, total: total ?? bugs.length, offset: 0, limit: 25 };
}

/** Two bugs with frequencies 9 and 5, already in API (frequency) order. */
export const TWO_BUG_PAGE: BugPage = bugPage([
  bugSummary({
    id: "bug-000002",
    utterance: "Play my holiday cooking playlist",
    status: "graded",
    uncertainty: 0.35,
    frequency: 9,
    category: "low_training_data",
    suggested_action: "Generate Data",
    has_golden: true,
  }),
  bugSummary({ id: "bug-000001", frequency: 5 }),
]);

/** A missing PLAYLIST_NAME slot over the tokens "holiday cooking". */
export const MISSING_SLOT_DIFF: BugDiff = {
  bug_id: "bug-000002",
  verdict: "missing_slot",
  tokens: ["Play", "my", "holiday", "cooking", "playlist"],
  findings: [
    {
      kind: "missing_slot",
      slot_label: "PLAYLIST_NAME",
      expected_span: [2, 4],
      predicted_span: null,
      expected_label: null,
      predicted_label: null,
    },
  ],
  expected_serialized:
    "[IN:PLAY_MUSIC Play my [SL:PLAYLIST_NAME holiday cooking ] [SL:MUSIC_TYPE playlist ] ]",
  predicted_serialized:
    "[IN:PLAY_MUSIC Play my holiday cooking [SL:MUSIC_TYPE playlist ] ]",
  expected_segments: [
    { text: "[IN:PLAY_MUSIC Play my ", highlight: false },
    { text: "[SL:PLAYLIST_NAME holiday cooking ]", highlight: true },
    { text: " [SL:MUSIC_TYPE playlist ] ]", highlight: false },
  ],
  predicted_segments: [
    {
      text: "[IN:PLAY_MUSIC Play my holiday cooking [SL:MUSIC_TYPE playlist ] ]",
      highlight: false,
    },
  ],
  expected_token_spans: [[2, 4]],
  predicted_token_spans: [],
};

/** Identical parses: a Match verdict must render zero highlights. */
export const MATCH_DIFF: BugDiff = {
  bug_id: "bug-000003",
  verdict: "match",
  tokens: ["call", "mom"],
  findings: [],
  expected_serialized: "[IN:CREATE_CALL call [SL:CONTACT mom ] ]",
  predicted_serialized: "[IN:CREATE_CALL call [SL:CONTACT mom ] ]",
  expected_segments: [
    { text: "[IN:CREATE_CALL call [SL:CONTACT mom ] ]", highlight: false },
  ],
  predicted_segments: [
    { text: "[IN:CREATE_CALL call [SL:CONTACT mom ] ]", highlight: false },
  ],
  expected_token_spans: [],
  predicted_token_spans: [],
};

/** A span mismatch on a slot wrapping a nested intent. */
export const NESTED_SPAN_DIFF: BugDiff = {
  bug_id: "bug-000004",
  verdict: "span_mismatch",
  tokens: ["Remind", "me", "to", "play", "adele", "at", "noon"],
  findings: [
    {
      kind: "span_mismatch",
      slot_label: "TODO",
      expected_span: [3, 5],
      predicted_span: [3, 6],
      expected_label: null,
      predicted_label: null,
    },
  ],
  expected_serialized:
    "[IN:CREATE_REMINDER Remind me to [SL:TODO [IN:PLAY_MUSIC play " +
    "[SL:ARTIST_NAME adele ] ] ] at [SL:DATE_TIME noon ] ]",
  predicted_serialized:
    "[IN:CREATE_REMINDER Remind me to [SL:TODO [IN:PLAY_MUSIC play " +
    "[SL:ARTIST_NAME adele ] ] at ] [SL:DATE_TIME noon ] ]",
  expected_segments: [
    { text: "[IN:CREATE_REMINDER Remind me to ", highlight: false },
    {
      text: "[SL:TODO [IN:PLAY_MUSIC play [SL:ARTIST_NAME adele ] ] ]",
      highlight: true,
    },
    { text: " at [SL:DATE_TIME noon ] ]", highlight: false },
  ],
  predicted_segments: [
    { text: "[IN:CREATE_REMINDER Remind me to ", highlight: false },
    {
      text: "[SL:TODO [IN:PLAY_MUSIC play [SL:ARTIST_NAME adele ] ] at ]",
      highlight: true,
    },
    { text: " [SL:DATE_TIME noon ] ]", highlight: false },
  ],
  expected_token_spans: [[3, 5]],
  predicted_token_spans: [[3, 6]],
};

export function proposal(overrides: Partial<Proposal> = {}): Proposal {
  return {
    id: "prop-000001",
    source_bug_id: "bug-000002",
    strategy: "templated",
    review_status: "pending",
    example_count: 2,
    examples: [
      {
        utterance: "Play my holiday cooking playlist",
        frame:
          "[IN:PLAY_MUSIC Play my [SL:PLAYLIST_NAME holiday cooking ] " +
          "[SL:MUSIC_TYPE playlist ] ]",
        weight: 1,
      },
      {
        utterance: "put on my holiday cooking playlist",
        frame:
          "[IN:PLAY_MUSIC put on my [SL:PLAYLIST_NAME holiday cooking ] " +
          "[SL:MUSIC_TYPE playlist ] ]",
        weight: 1,
      },
    ],
    ...overrides,
  };
}

export const REPORT: Report = {
  counts: {
    detected: 1,
    graded: 1,
    attributed: 0,
    fix_proposed: 0,
    fix_applied: 1,
    verified: 1,
    recurred: 1,
  },
  total: 5,
  fixes: 1,
  recurrences: ["bug-000005"],
  window_start: null,
  window_end: null,
};

export const EMPTY_REPORT: Report = {
  counts: {},
  total: 0,
  fixes: 0,
  recurrences: [],
  window_start: null,
  window_end: null,
};
