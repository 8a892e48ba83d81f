"""Bracketed intent and slot frames.

The frame language is the usual bracketed tree notation for task oriented
semantic parsing.  An utterance such as "Play my running playlist" is
annotated as::

    [IN:PLAY_MUSIC Play my [SL:PLAYLIST_NAME running ] [SL:MUSIC_TYPE playlist ] ]

Intents (``IN:``) label whole requests, slots (``SL:``) label token spans,
and intents may nest inside slots for compositional requests.  Tokenization
is plain whitespace splitting.  Tokens compare case sensitively; labels are
uppercased at parse time.  Closing brackets may be written flush against the
final token of a span, but the canonical serialization always spaces them
out, so ``serialize_frame(parse_frame(s))`` is the canonical form of ``s``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterator, Sequence, Union

DEFAULT_MAX_DEPTH = 8

_INTENT_PREFIX = "IN:"
_SLOT_PREFIX = "SL:"
_LABEL = re.compile(r"[A-Z][A-Z0-9_]*\Z")


class FrameError(ValueError):
    """Base class for frame parsing and comparison failures."""


class UnbalancedBracketsError(FrameError):
    """A bracket was opened and never closed, or closed without an open."""


class UnknownPrefixError(FrameError):
    """A bracket label did not start with IN: or SL:."""


class InvalidLabelError(FrameError):
    """A label did not match [A-Z][A-Z0-9_]* after its prefix."""


class EmptySlotError(FrameError):
    """A slot covered no tokens, not even through a nested intent."""


class SlotAtRootError(FrameError):
    """The outermost bracket of a frame was a slot instead of an intent."""


class MissingRootIntentError(FrameError):
    """The input did not begin with an intent bracket."""


class TrailingTokensError(FrameError):
    """Content remained after the root intent closed."""


class MaxDepthExceededError(FrameError):
    """Bracket nesting went past the configured limit."""


class InvalidNestingError(FrameError):
    """An intent sat directly inside an intent, or a slot inside a slot."""


class TokenMismatchError(FrameError):
    """An utterance and the frame meant to annotate it disagree on tokens."""


class TokenSequenceMismatchError(FrameError):
    """Two frames being compared do not annotate the same token sequence."""


@dataclass(frozen=True)
class Slot:
    """A labeled token span; children are tokens or nested intent frames."""

    label: str
    children: tuple = ()

    def tokens(self) -> tuple[str, ...]:
        out: list[str] = []
        for child in self.children:
            if isinstance(child, str):
                out.append(child)
            else:
                out.extend(child.tokens())
        return tuple(out)


@dataclass(frozen=True)
class Frame:
    """An intent node; children are tokens or slots."""

    label: str
    children: tuple = ()

    def tokens(self) -> tuple[str, ...]:
        out: list[str] = []
        for child in self.children:
            if isinstance(child, str):
                out.append(child)
            else:
                out.extend(child.tokens())
        return tuple(out)


FrameNode = Union[str, Slot, Frame]


def _lex(text: str) -> list[tuple[str, str]]:
    """Split text into ("open", label), ("close", "") and ("token", t) items.

    Flush closing brackets are peeled off the token they ride on, so both
    "running]" and "running ]" lex the same way.
    """
    items: list[tuple[str, str]] = []
    for raw in text.split():
        closes = 0
        core = raw
        while len(core) > 1 and core.endswith("]"):
            core = core[:-1]
            closes += 1
        if core == "]":
            core = ""
            closes += 1
        if core.startswith("["):
            label = core[1:]
            if "[" in label or "]" in label:
                raise UnbalancedBracketsError(f"stray bracket inside {raw!r}")
            items.append(("open", label))
        elif core:
            if "[" in core or "]" in core:
                raise UnbalancedBracketsError(f"stray bracket inside {raw!r}")
            items.append(("token", core))
        items.extend(("close", "") for _ in range(closes))
    return items


def parse_frame(text: str, max_depth: int = DEFAULT_MAX_DEPTH) -> Frame:
    """Parse bracketed frame notation into a Frame tree.

    Raises a FrameError subclass naming the first structural problem found.
    """
    items = _lex(text)
    if not items:
        raise MissingRootIntentError("empty input, expected an intent bracket")
    if items[0][0] == "token":
        raise MissingRootIntentError(f"frame must open with an intent bracket, got {items[0][1]!r}")
    if items[0][0] == "close":
        raise UnbalancedBracketsError("closing bracket before any open")
    root, pos = _parse_node(items, 0, 1, max_depth, parent="")
    if pos != len(items):
        kind = items[pos][0]
        if kind == "close":
            raise UnbalancedBracketsError("unmatched ] after the root intent")
        raise TrailingTokensError("content after the root intent closed")
    assert isinstance(root, Frame)
    return root


def _parse_node(
    items: list[tuple[str, str]],
    pos: int,
    depth: int,
    max_depth: int,
    parent: str,
) -> tuple[FrameNode, int]:
    if depth > max_depth:
        raise MaxDepthExceededError(f"bracket nesting exceeds max depth {max_depth}")
    label_text = items[pos][1]
    pos += 1
    if not label_text:
        # bare "[": the label rides on the next token
        if pos >= len(items) or items[pos][0] != "token":
            raise UnknownPrefixError("missing label after [")
        label_text = items[pos][1]
        pos += 1
    upper = label_text.upper()
    if upper.startswith(_INTENT_PREFIX):
        kind = "IN"
    elif upper.startswith(_SLOT_PREFIX):
        kind = "SL"
    else:
        raise UnknownPrefixError(f"bracket label {label_text!r} must start with IN: or SL:")
    label = upper[len(_INTENT_PREFIX):]
    if not _LABEL.match(label):
        raise InvalidLabelError(f"bad label in {label_text!r}")
    if parent == "" and kind == "SL":
        raise SlotAtRootError("the outermost bracket must be an intent")
    if parent == kind:
        what = "an intent inside an intent" if kind == "IN" else "a slot inside a slot"
        raise InvalidNestingError(f"{what} is not allowed")

    children: list[FrameNode] = []
    while True:
        if pos >= len(items):
            raise UnbalancedBracketsError(f"unclosed bracket for {label_text!r}")
        item_kind, value = items[pos]
        if item_kind == "close":
            pos += 1
            break
        if item_kind == "token":
            children.append(value)
            pos += 1
        else:
            child, pos = _parse_node(items, pos, depth + 1, max_depth, kind)
            children.append(child)

    if kind == "IN":
        return Frame(label, tuple(children)), pos
    slot = Slot(label, tuple(children))
    if not slot.tokens():
        raise EmptySlotError(f"slot {label} covers no tokens")
    return slot, pos


def serialize_frame(frame: Frame) -> str:
    """Render a frame in canonical form: single spaces, spaced closing brackets."""
    parts: list[str] = []
    _emit(frame, parts)
    return " ".join(parts)


def _emit(node: Union[Frame, Slot], parts: list[str]) -> None:
    prefix = _INTENT_PREFIX if isinstance(node, Frame) else _SLOT_PREFIX
    parts.append("[" + prefix + node.label)
    for child in node.children:
        if isinstance(child, str):
            parts.append(child)
        else:
            _emit(child, parts)
    parts.append("]")


def leaf_slots(frame: Frame) -> list[tuple[tuple[int, ...], Slot, tuple[int, int]]]:
    """All slots whose children are plain tokens, with tree path and token span.

    The path is the sequence of child indices from the root; spans are
    half-open token index ranges in document order.
    """
    found: list[tuple[tuple[int, ...], Slot, tuple[int, int]]] = []

    def walk(node: Union[Frame, Slot], path: tuple[int, ...], start: int) -> None:
        pos = start
        for i, child in enumerate(node.children):
            if isinstance(child, str):
                pos += 1
                continue
            end = pos + len(child.tokens())
            child_path = path + (i,)
            if isinstance(child, Slot) and all(isinstance(g, str) for g in child.children):
                found.append((child_path, child, (pos, end)))
            else:
                walk(child, child_path, pos)
            pos = end

    walk(frame, (), 0)
    return found


def replace_slot_tokens(frame: Frame, path: Sequence[int], new_tokens: Sequence[str]) -> Frame:
    """Copy of frame with the slot at path holding new_tokens instead."""
    new_tokens = tuple(new_tokens)
    if not new_tokens:
        raise EmptySlotError("a slot cannot be rewritten to hold no tokens")

    def rebuild(node: Union[Frame, Slot], remaining: tuple[int, ...]) -> Union[Frame, Slot]:
        if not remaining:
            if not isinstance(node, Slot):
                raise ValueError("path does not lead to a slot")
            return Slot(node.label, new_tokens)
        idx, rest = remaining[0], remaining[1:]
        children = list(node.children)
        child = children[idx]
        if isinstance(child, str):
            raise ValueError("path steps through a plain token")
        children[idx] = rebuild(child, rest)
        return type(node)(node.label, tuple(children))

    out = rebuild(frame, tuple(path))
    assert isinstance(out, Frame)
    return out


class DiffVerdict(str, Enum):
    MATCH = "match"
    DOMAIN_MISMATCH = "domain_mismatch"
    INTENT_MISMATCH = "intent_mismatch"
    MISSING_SLOT = "missing_slot"
    EXTRA_SLOT = "extra_slot"
    SPAN_MISMATCH = "span_mismatch"


# Lower rank = more severe. The overall verdict is the most severe finding.
_SEVERITY = {
    DiffVerdict.DOMAIN_MISMATCH: 0,
    DiffVerdict.INTENT_MISMATCH: 1,
    DiffVerdict.MISSING_SLOT: 2,
    DiffVerdict.EXTRA_SLOT: 3,
    DiffVerdict.SPAN_MISMATCH: 4,
}


@dataclass(frozen=True)
class DiffFinding:
    """One localized disagreement between an expected and a predicted frame.

    Spans are half-open token index ranges over the shared token sequence.
    Slot findings carry slot_label; intent and domain findings carry the two
    intent labels instead.
    """

    kind: DiffVerdict
    slot_label: str | None = None
    expected_span: tuple[int, int] | None = None
    predicted_span: tuple[int, int] | None = None
    expected_label: str | None = None
    predicted_label: str | None = None


@dataclass(frozen=True)
class FrameDiff:
    verdict: DiffVerdict
    findings: tuple[DiffFinding, ...] = ()


def diff_frames(expected: Frame, predicted: Frame, ontology) -> FrameDiff:
    """Compare two frames over the same token sequence.

    The verdict is Match exactly when the canonical serializations are
    equal; otherwise it is the most severe finding, ordered DomainMismatch,
    IntentMismatch, MissingSlot, ExtraSlot, SpanMismatch.  Slots at the same
    level are matched as a multiset keyed by (label, token span), so slot
    order never causes a mismatch.  The ontology supplies the intent to
    domain mapping used to tell domain errors from intent errors.
    """
    if expected.tokens() != predicted.tokens():
        raise TokenSequenceMismatchError("frames annotate different token sequences")
    if serialize_frame(expected) == serialize_frame(predicted):
        return FrameDiff(DiffVerdict.MATCH)
    findings: list[DiffFinding] = []
    _compare_frames(expected, predicted, 0, True, ontology, findings)
    verdict = min(
        (f.kind for f in findings),
        key=_SEVERITY.__getitem__,
        default=DiffVerdict.SPAN_MISMATCH,
    )
    return FrameDiff(verdict, tuple(findings))


def is_bug(expected: Frame, predicted: Frame, ontology) -> bool:
    """True when the prediction does not Match the expected frame."""
    return diff_frames(expected, predicted, ontology).verdict is not DiffVerdict.MATCH


def _child_slots(node: Union[Frame, Slot], start: int) -> list[tuple[str, tuple[int, int], Slot]]:
    out = []
    pos = start
    for child in node.children:
        if isinstance(child, str):
            pos += 1
            continue
        end = pos + len(child.tokens())
        if isinstance(child, Slot):
            out.append((child.label, (pos, end), child))
        pos = end
    return out


def _child_frames(slot: Slot, start: int) -> list[tuple[tuple[int, int], Frame]]:
    out = []
    pos = start
    for child in slot.children:
        if isinstance(child, str):
            pos += 1
            continue
        end = pos + len(child.tokens())
        out.append(((pos, end), child))
        pos = end
    return out


def _compare_frames(
    fe: Frame,
    fp: Frame,
    start: int,
    is_root: bool,
    ontology,
    findings: list[DiffFinding],
) -> None:
    span = (start, start + len(fe.tokens()))
    if fe.label != fp.label:
        domains = getattr(ontology, "domains", {}) or {}
        kind = DiffVerdict.INTENT_MISMATCH
        if is_root and domains.get(fe.label) != domains.get(fp.label):
            kind = DiffVerdict.DOMAIN_MISMATCH
        findings.append(
            DiffFinding(
                kind,
                expected_span=span,
                predicted_span=span,
                expected_label=fe.label,
                predicted_label=fp.label,
            )
        )

    slots_e = _child_slots(fe, start)
    slots_p = _child_slots(fp, start)
    by_key_p: dict[tuple[str, tuple[int, int]], list[Slot]] = {}
    for label, sspan, slot in slots_p:
        by_key_p.setdefault((label, sspan), []).append(slot)

    unmatched_e: list[tuple[str, tuple[int, int], Slot]] = []
    for label, sspan, slot in slots_e:
        bucket = by_key_p.get((label, sspan))
        if bucket:
            other = bucket.pop(0)
            _compare_slot_pair(slot, other, sspan[0], ontology, findings)
        else:
            unmatched_e.append((label, sspan, slot))
    unmatched_p = [
        (label, sspan, slot)
        for (label, sspan), bucket in by_key_p.items()
        for slot in bucket
    ]
    unmatched_p.sort(key=lambda item: item[1])

    # Same label on both sides but with different boundaries reads as a span
    # error; anything left is a genuinely missing or hallucinated slot.
    leftovers_p: dict[str, list[tuple[int, int]]] = {}
    for label, sspan, _slot in unmatched_p:
        leftovers_p.setdefault(label, []).append(sspan)
    for label, sspan, _slot in unmatched_e:
        spans = leftovers_p.get(label)
        if spans:
            findings.append(
                DiffFinding(
                    DiffVerdict.SPAN_MISMATCH,
                    slot_label=label,
                    expected_span=sspan,
                    predicted_span=spans.pop(0),
                )
            )
        else:
            findings.append(
                DiffFinding(DiffVerdict.MISSING_SLOT, slot_label=label, expected_span=sspan)
            )
    for label, spans in leftovers_p.items():
        for sspan in spans:
            findings.append(
                DiffFinding(DiffVerdict.EXTRA_SLOT, slot_label=label, predicted_span=sspan)
            )


def _compare_slot_pair(
    se: Slot,
    sp: Slot,
    start: int,
    ontology,
    findings: list[DiffFinding],
) -> None:
    frames_e = _child_frames(se, start)
    frames_p = _child_frames(sp, start)
    by_span_p: dict[tuple[int, int], list[Frame]] = {}
    for fspan, child in frames_p:
        by_span_p.setdefault(fspan, []).append(child)
    for fspan, child in frames_e:
        bucket = by_span_p.get(fspan)
        if bucket:
            other = bucket.pop(0)
            _compare_frames(child, other, fspan[0], False, ontology, findings)
        else:
            findings.append(
                DiffFinding(
                    DiffVerdict.INTENT_MISMATCH,
                    expected_span=fspan,
                    expected_label=child.label,
                )
            )
    for fspan, bucket in by_span_p.items():
        for child in bucket:
            findings.append(
                DiffFinding(
                    DiffVerdict.INTENT_MISMATCH,
                    predicted_span=fspan,
                    predicted_label=child.label,
                )
            )
