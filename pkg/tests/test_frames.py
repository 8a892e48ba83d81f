"""Parser, serializer, and diff behavior.

The diff tests check agreement against an oracle that flattens each frame
into a multiset of (ancestry path, label, token span) triples and compares
those; two frames over the same tokens are structurally equal exactly when
their triple multisets are equal.
"""

import random
from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from framefix.frames import (
    DiffVerdict,
    EmptySlotError,
    Frame,
    InvalidLabelError,
    InvalidNestingError,
    MaxDepthExceededError,
    MissingRootIntentError,
    Slot,
    SlotAtRootError,
    TokenSequenceMismatchError,
    TrailingTokensError,
    UnbalancedBracketsError,
    UnknownPrefixError,
    diff_frames,
    is_bug,
    leaf_slots,
    parse_frame,
    replace_slot_tokens,
    serialize_frame,
)
from framefix.synth import random_frame, random_frame_over_tokens, random_tokens

CANONICAL = "[IN:PLAY_MUSIC Play my [SL:PLAYLIST_NAME running ] [SL:MUSIC_TYPE playlist ] ]"
FLUSH = "[IN:PLAY_MUSIC Play my [SL:PLAYLIST_NAME running] [SL:MUSIC_TYPE playlist]]"


class TestParse:
    def test_canonical_example(self):
        frame = parse_frame(CANONICAL)
        assert frame.label == "PLAY_MUSIC"
        assert frame.children[0] == "Play"
        assert frame.children[1] == "my"
        assert frame.children[2] == Slot("PLAYLIST_NAME", ("running",))
        assert frame.children[3] == Slot("MUSIC_TYPE", ("playlist",))

    def test_flush_and_spaced_brackets_parse_the_same(self):
        assert parse_frame(FLUSH) == parse_frame(CANONICAL)

    def test_serialize_canonicalizes_flush_input(self):
        assert serialize_frame(parse_frame(FLUSH)) == CANONICAL

    def test_labels_are_uppercased(self):
        frame = parse_frame("[in:play_music hello ]")
        assert frame.label == "PLAY_MUSIC"

    def test_tokens_keep_their_case(self):
        frame = parse_frame("[IN:PLAY_MUSIC Play PLAY play ]")
        assert frame.tokens() == ("Play", "PLAY", "play")

    def test_empty_intent_is_legal(self):
        frame = parse_frame("[IN:UNSUPPORTED ]")
        assert frame == Frame("UNSUPPORTED", ())

    def test_bare_open_bracket_with_label_token(self):
        assert parse_frame("[ IN:PLAY_MUSIC hello ]") == parse_frame("[IN:PLAY_MUSIC hello ]")

    def test_nested_intent_inside_slot(self):
        frame = parse_frame(
            "[IN:SEND_MESSAGE text [SL:CONTACT mom ] [SL:MESSAGE [IN:GET_WEATHER is it raining ] ] ]"
        )
        message = frame.children[2]
        assert isinstance(message, Slot)
        assert isinstance(message.children[0], Frame)
        assert message.children[0].label == "GET_WEATHER"

    def test_unclosed_bracket(self):
        with pytest.raises(UnbalancedBracketsError):
            parse_frame("[IN:PLAY_MUSIC Play my")

    def test_stray_close(self):
        with pytest.raises(UnbalancedBracketsError):
            parse_frame("[IN:PLAY_MUSIC Play ] ]")

    def test_close_before_open(self):
        with pytest.raises(UnbalancedBracketsError):
            parse_frame("] [IN:PLAY_MUSIC Play ]")

    def test_unknown_prefix(self):
        with pytest.raises(UnknownPrefixError):
            parse_frame("[FOO:PLAY_MUSIC Play ]")

    def test_missing_label_after_bracket(self):
        with pytest.raises(UnknownPrefixError):
            parse_frame("[ [IN:PLAY_MUSIC Play ] ]")

    def test_invalid_label_characters(self):
        with pytest.raises(InvalidLabelError):
            parse_frame("[IN:9BAD Play ]")
        with pytest.raises(InvalidLabelError):
            parse_frame("[IN: Play ]")

    def test_empty_slot(self):
        with pytest.raises(EmptySlotError):
            parse_frame("[IN:PLAY_MUSIC Play [SL:PLAYLIST_NAME ] ]")

    def test_slot_empty_through_nested_intent(self):
        with pytest.raises(EmptySlotError):
            parse_frame("[IN:PLAY_MUSIC Play [SL:PLAYLIST_NAME [IN:UNSUPPORTED ] ] ]")

    def test_slot_at_root(self):
        with pytest.raises(SlotAtRootError):
            parse_frame("[SL:PLAYLIST_NAME running ]")

    def test_missing_root_intent(self):
        with pytest.raises(MissingRootIntentError):
            parse_frame("Play my running playlist")
        with pytest.raises(MissingRootIntentError):
            parse_frame("   ")

    def test_trailing_tokens(self):
        with pytest.raises(TrailingTokensError):
            parse_frame("[IN:PLAY_MUSIC Play ] extra")

    def test_intent_directly_inside_intent(self):
        with pytest.raises(InvalidNestingError):
            parse_frame("[IN:PLAY_MUSIC [IN:PAUSE_MUSIC stop ] ]")

    def test_slot_directly_inside_slot(self):
        with pytest.raises(InvalidNestingError):
            parse_frame("[IN:PLAY_MUSIC [SL:MESSAGE [SL:CONTACT mom ] ] ]")

    def test_max_depth_is_configurable(self):
        text = "[IN:A [SL:B [IN:C [SL:D [IN:E [SL:F [IN:G [SL:H x ] ] ] ] ] ] ] ]"
        parse_frame(text)  # depth 8 fits the default budget
        deeper = "[IN:A [SL:B [IN:C [SL:D [IN:E [SL:F [IN:G [SL:H [IN:I x ] ] ] ] ] ] ] ] ]"
        with pytest.raises(MaxDepthExceededError):
            parse_frame(deeper)
        parse_frame(deeper, max_depth=9)
        with pytest.raises(MaxDepthExceededError):
            parse_frame(text, max_depth=7)

    def test_embedded_bracket_in_token_rejected(self):
        with pytest.raises(UnbalancedBracketsError):
            parse_frame("[IN:PLAY_MUSIC pl[ay ]")


class TestRoundTrip:
    def test_seeded_random_frames(self):
        rng = random.Random(20260825)
        for _ in range(500):
            frame = random_frame(rng)
            text = serialize_frame(frame)
            assert parse_frame(text) == frame

    def test_messy_spacing_canonicalizes(self):
        rng = random.Random(7)
        for _ in range(200):
            frame = random_frame(rng)
            canonical = serialize_frame(frame)
            messy = canonical.replace(" ]", "]") if rng.random() < 0.5 else canonical.replace(" ", "  ")
            assert serialize_frame(parse_frame(messy)) == canonical


_token_st = st.text(min_size=1, max_size=6).filter(
    lambda s: not any(c.isspace() or c in "[]" for c in s)
)
_label_st = st.from_regex(r"[A-Z][A-Z0-9_]{0,6}", fullmatch=True)


def _frames_st(depth: int):
    if depth <= 0:
        children = st.lists(_token_st, max_size=3)
    else:
        children = st.lists(st.one_of(_token_st, _slots_st(depth - 1)), max_size=3)
    return st.builds(lambda label, kids: Frame(label, tuple(kids)), _label_st, children)


def _slots_st(depth: int):
    if depth <= 0:
        children = st.lists(_token_st, min_size=1, max_size=3)
    else:
        children = st.lists(st.one_of(_token_st, _frames_st(depth - 1)), min_size=1, max_size=3)
    return st.builds(lambda label, kids: Slot(label, tuple(kids)), _label_st, children).filter(
        lambda slot: len(slot.tokens()) > 0
    )


@settings(max_examples=200)
@given(_frames_st(3))
def test_round_trip_property(frame):
    assert parse_frame(serialize_frame(frame)) == frame


def frame_triples(frame):
    """Oracle: multiset of (ancestry path, kind:label, token span) triples."""

    def width(node):
        return sum(1 if isinstance(c, str) else width(c) for c in node.children)

    out = Counter()

    def collect(node, path, start):
        kind = "IN" if isinstance(node, Frame) else "SL"
        me = (path, f"{kind}:{node.label}", (start, start + width(node)))
        out[me] += 1
        pos = start
        for child in node.children:
            if isinstance(child, str):
                pos += 1
            else:
                collect(child, path + ((f"{kind}:{node.label}", start),), pos)
                pos += width(child)

    collect(frame, (), 0)
    return out


class TestDiff:
    def test_identical_frames_match(self, toy_ontology):
        frame = parse_frame(CANONICAL)
        diff = diff_frames(frame, frame, toy_ontology)
        assert diff.verdict is DiffVerdict.MATCH
        assert diff.findings == ()
        assert not is_bug(frame, frame, toy_ontology)

    def test_missing_slot_example(self, toy_ontology):
        expected = parse_frame(
            "[IN:PLAY_MUSIC Play my [SL:PLAYLIST_NAME holiday cooking ] [SL:MUSIC_TYPE playlist ] ]"
        )
        predicted = parse_frame(
            "[IN:PLAY_MUSIC Play my holiday cooking [SL:MUSIC_TYPE playlist ] ]"
        )
        diff = diff_frames(expected, predicted, toy_ontology)
        assert diff.verdict is DiffVerdict.MISSING_SLOT
        assert len(diff.findings) == 1
        finding = diff.findings[0]
        assert finding.slot_label == "PLAYLIST_NAME"
        assert finding.expected_span == (2, 4)
        assert finding.predicted_span is None
        assert is_bug(expected, predicted, toy_ontology)

    def test_domain_mismatch_outranks_everything(self, toy_ontology):
        expected = parse_frame("[IN:PLAY_MUSIC play [SL:PLAYLIST_NAME jazz ] ]")
        predicted = parse_frame("[IN:CREATE_CALL play jazz ]")
        diff = diff_frames(expected, predicted, toy_ontology)
        assert diff.verdict is DiffVerdict.DOMAIN_MISMATCH
        kinds = {f.kind for f in diff.findings}
        assert DiffVerdict.MISSING_SLOT in kinds

    def test_same_domain_intent_mismatch(self, toy_ontology):
        expected = parse_frame("[IN:PLAY_MUSIC play jazz ]")
        predicted = parse_frame("[IN:PAUSE_MUSIC play jazz ]")
        assert diff_frames(expected, predicted, toy_ontology).verdict is DiffVerdict.INTENT_MISMATCH

    def test_missing_outranks_extra(self, toy_ontology):
        expected = parse_frame("[IN:PLAY_MUSIC [SL:PLAYLIST_NAME jazz ] beats ]")
        predicted = parse_frame("[IN:PLAY_MUSIC jazz [SL:MUSIC_TYPE beats ] ]")
        diff = diff_frames(expected, predicted, toy_ontology)
        assert diff.verdict is DiffVerdict.MISSING_SLOT
        kinds = [f.kind for f in diff.findings]
        assert DiffVerdict.EXTRA_SLOT in kinds

    def test_extra_slot_alone(self, toy_ontology):
        expected = parse_frame("[IN:PLAY_MUSIC play some jazz ]")
        predicted = parse_frame("[IN:PLAY_MUSIC play some [SL:PLAYLIST_NAME jazz ] ]")
        diff = diff_frames(expected, predicted, toy_ontology)
        assert diff.verdict is DiffVerdict.EXTRA_SLOT
        assert diff.findings[0].predicted_span == (2, 3)

    def test_span_mismatch_pairs_same_label(self, toy_ontology):
        expected = parse_frame("[IN:PLAY_MUSIC play [SL:PLAYLIST_NAME smooth jazz ] now ]")
        predicted = parse_frame("[IN:PLAY_MUSIC play smooth [SL:PLAYLIST_NAME jazz ] now ]")
        diff = diff_frames(expected, predicted, toy_ontology)
        assert diff.verdict is DiffVerdict.SPAN_MISMATCH
        assert len(diff.findings) == 1
        finding = diff.findings[0]
        assert finding.slot_label == "PLAYLIST_NAME"
        assert finding.expected_span == (1, 3)
        assert finding.predicted_span == (2, 3)

    def test_nested_intent_mismatch_is_not_domain(self, toy_ontology):
        expected = parse_frame(
            "[IN:SEND_MESSAGE tell mom [SL:MESSAGE [IN:GET_WEATHER rain soon ] ] ]"
        )
        predicted = parse_frame(
            "[IN:SEND_MESSAGE tell mom [SL:MESSAGE [IN:PLAY_MUSIC rain soon ] ] ]"
        )
        diff = diff_frames(expected, predicted, toy_ontology)
        assert diff.verdict is DiffVerdict.INTENT_MISMATCH

    def test_token_sequence_mismatch_raises(self, toy_ontology):
        expected = parse_frame("[IN:PLAY_MUSIC play jazz ]")
        predicted = parse_frame("[IN:PLAY_MUSIC play blues ]")
        with pytest.raises(TokenSequenceMismatchError):
            diff_frames(expected, predicted, toy_ontology)

    def test_match_iff_triple_multisets_agree(self, toy_ontology):
        rng = random.Random(99331)
        checked_mismatch = 0
        for _ in range(400):
            tokens = random_tokens(rng)
            left = random_frame_over_tokens(tokens, rng)
            if rng.random() < 0.25:
                right = parse_frame(serialize_frame(left))
            else:
                right = random_frame_over_tokens(tokens, rng)
            structurally_equal = frame_triples(left) == frame_triples(right)
            assert is_bug(left, right, toy_ontology) == (not structurally_equal)
            if not structurally_equal:
                checked_mismatch += 1
                diff = diff_frames(left, right, toy_ontology)
                assert diff.findings, "non-Match verdict must carry findings"
        assert checked_mismatch > 100


class TestSlotHelpers:
    def test_leaf_slots_spans(self):
        frame = parse_frame(
            "[IN:SEND_MESSAGE text [SL:CONTACT mom ] saying [SL:MESSAGE [IN:GET_WEATHER rain [SL:DATE_TIME today ] ] ] ]"
        )
        found = leaf_slots(frame)
        labels = [(slot.label, span) for _, slot, span in found]
        assert ("CONTACT", (1, 2)) in labels
        assert ("DATE_TIME", (4, 5)) in labels
        # MESSAGE holds a nested intent, so it is not a leaf slot
        assert all(slot.label != "MESSAGE" for _, slot, _ in found)

    def test_replace_slot_tokens(self):
        frame = parse_frame(CANONICAL)
        path = next(p for p, slot, _ in leaf_slots(frame) if slot.label == "PLAYLIST_NAME")
        swapped = replace_slot_tokens(frame, path, ("baking",))
        assert serialize_frame(swapped) == (
            "[IN:PLAY_MUSIC Play my [SL:PLAYLIST_NAME baking ] [SL:MUSIC_TYPE playlist ] ]"
        )
        # the original is untouched
        assert serialize_frame(frame) == CANONICAL

    def test_replace_refuses_empty(self):
        frame = parse_frame(CANONICAL)
        path = leaf_slots(frame)[0][0]
        with pytest.raises(EmptySlotError):
            replace_slot_tokens(frame, path, ())
