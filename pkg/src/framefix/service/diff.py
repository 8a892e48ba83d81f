"""Side by side rendering data for a frame diff.

Each side of the diff becomes a list of (text, highlight) segments whose
concatenation is exactly the canonical serialization of that side, so a
client can render highlights without re-parsing bracket syntax.
"""

from __future__ import annotations

from typing import Union

from ..frames import (
    DiffFinding,
    DiffVerdict,
    Frame,
    Slot,
    serialize_frame,
)

_EXPECTED_SLOT_KINDS = (DiffVerdict.MISSING_SLOT, DiffVerdict.SPAN_MISMATCH)
_PREDICTED_SLOT_KINDS = (DiffVerdict.EXTRA_SLOT, DiffVerdict.SPAN_MISMATCH)
_INTENT_KINDS = (DiffVerdict.INTENT_MISMATCH, DiffVerdict.DOMAIN_MISMATCH)


def _collect(
    node: Union[Frame, Slot],
    start: int,
    parts: list[str],
    entries: list[dict],
) -> int:
    header = len(parts)
    prefix = "IN:" if isinstance(node, Frame) else "SL:"
    parts.append("[" + prefix + node.label)
    pos = start
    for child in node.children:
        if isinstance(child, str):
            parts.append(child)
            pos += 1
        else:
            pos = _collect(child, pos, parts, entries)
    parts.append("]")
    entries.append(
        {
            "kind": "intent" if isinstance(node, Frame) else "slot",
            "label": node.label,
            "span": (start, pos),
            "header": header,
            "first": header,
            "last": len(parts) - 1,
        }
    )
    return pos


def _char_range(parts: list[str], first: int, last: int) -> tuple[int, int]:
    offset = sum(len(p) + 1 for p in parts[:first])
    width = sum(len(p) + 1 for p in parts[first:last + 1]) - 1
    return offset, offset + width


def _merge(ranges: list[tuple[int, int]]) -> list[tuple[int, int]]:
    merged: list[list[int]] = []
    for start, end in sorted(ranges):
        if merged and start <= merged[-1][1]:
            merged[-1][1] = max(end, merged[-1][1])
        else:
            merged.append([start, end])
    return [(a, b) for a, b in merged]


def diff_segments(
    frame: Frame,
    findings: tuple[DiffFinding, ...],
    side: str,
) -> list[tuple[str, bool]]:
    """Split the canonical serialization into (text, highlight) segments.

    side is "expected" or "predicted"; highlights cover the slots and intent
    tags the findings implicate on that side.
    """
    parts: list[str] = []
    entries: list[dict] = []
    _collect(frame, 0, parts, entries)
    text = " ".join(parts)
    assert text == serialize_frame(frame)

    slot_kinds = _EXPECTED_SLOT_KINDS if side == "expected" else _PREDICTED_SLOT_KINDS
    ranges: list[tuple[int, int]] = []
    for finding in findings:
        span = finding.expected_span if side == "expected" else finding.predicted_span
        if finding.kind in slot_kinds and span is not None:
            for entry in entries:
                if (
                    entry["kind"] == "slot"
                    and entry["label"] == finding.slot_label
                    and entry["span"] == span
                ):
                    ranges.append(_char_range(parts, entry["first"], entry["last"]))
                    break
        elif finding.kind in _INTENT_KINDS:
            label = (
                finding.expected_label if side == "expected" else finding.predicted_label
            )
            for entry in entries:
                if (
                    entry["kind"] == "intent"
                    and entry["label"] == label
                    and entry["span"] == span
                ):
                    # highlight just the [IN:LABEL tag, not the whole subtree
                    ranges.append(_char_range(parts, entry["header"], entry["header"]))
                    break

    segments: list[tuple[str, bool]] = []
    pos = 0
    for start, end in _merge(ranges):
        if start > pos:
            segments.append((text[pos:start], False))
        segments.append((text[start:end], True))
        pos = end
    if pos < len(text) or not segments:
        segments.append((text[pos:], False))
    return segments


def highlight_token_spans(
    findings: tuple[DiffFinding, ...],
    side: str,
) -> list[tuple[int, int]]:
    """Token index ranges a client should highlight in the raw utterance."""
    slot_kinds = _EXPECTED_SLOT_KINDS if side == "expected" else _PREDICTED_SLOT_KINDS
    spans = []
    for finding in findings:
        span = finding.expected_span if side == "expected" else finding.predicted_span
        if finding.kind in slot_kinds and span is not None:
            spans.append(span)
    return _merge(spans)
