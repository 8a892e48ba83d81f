"""Templates, expansions, proposals, rules, and dataset transforms."""

import pytest

from framefix.correction import (
    MAX_EXAMPLES_PER_PROPOSAL,
    AugmentationProposal,
    DuplicateRuleError,
    Gazetteer,
    InvalidTargetLabelError,
    MissingGazetteerError,
    ProposalStrategy,
    ReviewStatus,
    RuleStore,
    TransformOp,
    TransformScope,
    TransformSpec,
    apply_transform,
    exact_match_proposal,
    expand_template,
    extract_templates,
    gazetteer_from_dict,
    generate_rule,
    is_placeholder,
    placeholder_label,
    placeholder_token,
    templated_proposal,
)
from framefix.attribution import build_training_index
from framefix.frames import TokenMismatchError, parse_frame, serialize_frame
from framefix.records import TrainingExample
from framefix.store import new_bug

THREE_SLOT = (
    "[IN:PLAY_MUSIC play [SL:PLAYLIST_NAME running ] for [SL:CONTACT alice ] "
    "in [SL:LOCATION boston ] ]"
)


def _bug(utterance, golden, bug_id="bug-c"):
    bug = new_bug(
        bug_id,
        utterance,
        parse_frame(f"[IN:UNSUPPORTED {utterance} ]"),
        0.8,
        1,
        timestamp=1.0,
    )
    bug.golden_frame = parse_frame(golden)
    return bug


@pytest.fixture
def gazetteers():
    return Gazetteer(
        {
            "PLAYLIST_NAME": (("gym",), ("road", "trip"), ("focus",)),
            "CONTACT": (("bob",), ("carol",)),
            "LOCATION": (("paris",), ("new", "york")),
        }
    )


class TestPlaceholders:
    def test_round_trip(self):
        token = placeholder_token("PLAYLIST_NAME")
        assert token == "<SL:PLAYLIST_NAME>"
        assert is_placeholder(token)
        assert placeholder_label(token) == "PLAYLIST_NAME"

    def test_plain_token_is_not_placeholder(self):
        assert not is_placeholder("playlist")


class TestExtractTemplates:
    def test_three_slots_enumerate_smallest_first_and_truncate(self, toy_ontology):
        bug = _bug("play running for alice in boston", THREE_SLOT)
        templates = extract_templates(bug, toy_ontology)
        assert len(templates) == 5
        assert [t.bound_slots for t in templates] == [
            ("PLAYLIST_NAME",),
            ("CONTACT",),
            ("LOCATION",),
            ("PLAYLIST_NAME", "CONTACT"),
            ("PLAYLIST_NAME", "LOCATION"),
        ]

    def test_full_enumeration_when_under_cap(self, toy_ontology):
        bug = _bug("play running for alice in boston", THREE_SLOT)
        templates = extract_templates(bug, toy_ontology, max_templates=10)
        assert len(templates) == 7
        assert templates[-1].bound_slots == ("PLAYLIST_NAME", "CONTACT", "LOCATION")

    def test_pattern_substitutes_placeholder(self, toy_ontology):
        bug = _bug(
            "play my running playlist",
            "[IN:PLAY_MUSIC play my [SL:PLAYLIST_NAME running ] playlist ]",
        )
        (template,) = extract_templates(bug, toy_ontology, max_templates=1)
        assert template.pattern == ("play", "my", "<SL:PLAYLIST_NAME>", "playlist")
        assert template.source_utterance == bug.utterance

    def test_non_templatable_and_nested_slots_excluded(self, toy_ontology):
        golden = (
            "[IN:SEND_MESSAGE text [SL:CONTACT alice ] that "
            "[SL:MESSAGE [IN:GET_WEATHER rain is coming ] ] [SL:DATE_TIME today ] ]"
        )
        bug = _bug("text alice that rain is coming today", golden)
        templates = extract_templates(bug, toy_ontology)
        assert [t.bound_slots for t in templates] == [("CONTACT",)]

    def test_no_templatable_slots_yields_nothing(self, toy_ontology):
        bug = _bug("pause the music", "[IN:PAUSE_MUSIC pause the music ]")
        assert extract_templates(bug, toy_ontology) == []

    def test_requires_golden(self, toy_ontology):
        bug = new_bug(
            "b", "hi there", parse_frame("[IN:UNSUPPORTED hi there ]"), 0.5, 1, timestamp=1.0
        )
        with pytest.raises(ValueError):
            extract_templates(bug, toy_ontology)


class TestExpandTemplate:
    def _template(self, toy_ontology, max_templates=1):
        bug = _bug(
            "play my running playlist",
            "[IN:PLAY_MUSIC play my [SL:PLAYLIST_NAME running ] playlist ]",
        )
        return extract_templates(bug, toy_ontology, max_templates)[0]

    def test_fills_gazetteer_values(self, toy_ontology, gazetteers):
        template = self._template(toy_ontology)
        examples = expand_template(template, gazetteers, seed=0)
        texts = sorted(e.utterance for e in examples)
        assert texts == [
            "play my focus playlist",
            "play my gym playlist",
            "play my road trip playlist",
        ]
        for example in examples:
            assert example.weight == 1
            assert tuple(example.utterance.split()) == example.frame.tokens()

    def test_single_value_gazetteer_yields_one_example(self, toy_ontology):
        template = self._template(toy_ontology)
        examples = expand_template(template, Gazetteer({"PLAYLIST_NAME": (("gym",),)}))
        assert [e.utterance for e in examples] == ["play my gym playlist"]

    def test_source_utterance_never_reproduced(self, toy_ontology):
        template = self._template(toy_ontology)
        examples = expand_template(
            template, Gazetteer({"PLAYLIST_NAME": (("running",),)})
        )
        assert examples == []

    @pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
    def test_expansion_invariants(self, toy_ontology, seed):
        big = Gazetteer(
            {"PLAYLIST_NAME": tuple((f"mix{i}",) for i in range(30))}
        )
        template = self._template(toy_ontology)
        examples = expand_template(template, big, max_expansions=10, seed=seed)
        texts = [e.utterance for e in examples]
        assert len(texts) == 10
        assert len(set(texts)) == 10
        assert template.source_utterance not in texts

    def test_same_seed_same_expansion(self, toy_ontology, gazetteers):
        template = self._template(toy_ontology)
        a = expand_template(template, gazetteers, seed=7)
        b = expand_template(template, gazetteers, seed=7)
        assert [e.utterance for e in a] == [e.utterance for e in b]

    def test_missing_gazetteer_raises(self, toy_ontology):
        template = self._template(toy_ontology)
        with pytest.raises(MissingGazetteerError):
            expand_template(template, Gazetteer({}))


class TestProposals:
    def test_exact_match_proposal_weight_five_pending(self, toy_ontology):
        bug = _bug(
            "play my running playlist",
            "[IN:PLAY_MUSIC play my [SL:PLAYLIST_NAME running ] playlist ]",
        )
        proposal = exact_match_proposal(bug)
        assert proposal.id == "bug-c-exact"
        assert proposal.strategy is ProposalStrategy.EXACT_MATCH
        assert proposal.review_status is ReviewStatus.PENDING
        (example,) = proposal.examples
        assert example.utterance == bug.utterance
        assert example.weight == 5
        assert serialize_frame(example.frame) == serialize_frame(bug.golden_frame)

    def test_templated_proposal_dedupes_across_templates(
        self, toy_ontology, gazetteers
    ):
        bug = _bug("play running for alice in boston", THREE_SLOT)
        proposal = templated_proposal(bug, toy_ontology, gazetteers, seed=0)
        assert proposal is not None
        assert proposal.strategy is ProposalStrategy.TEMPLATED
        texts = [e.utterance for e in proposal.examples]
        assert len(texts) == len(set(texts))
        assert bug.utterance not in texts
        assert len(texts) <= MAX_EXAMPLES_PER_PROPOSAL

    def test_templated_proposal_skips_known_training_texts(
        self, toy_ontology, gazetteers
    ):
        bug = _bug(
            "play my running playlist",
            "[IN:PLAY_MUSIC play my [SL:PLAYLIST_NAME running ] playlist ]",
        )
        full = templated_proposal(bug, toy_ontology, gazetteers, seed=0)
        known = build_training_index(
            [
                TrainingExample(
                    "play my gym playlist",
                    parse_frame("[IN:PLAY_MUSIC play my [SL:PLAYLIST_NAME gym ] playlist ]"),
                )
            ]
        )
        pruned = templated_proposal(bug, toy_ontology, gazetteers, seed=0, existing=known)
        assert len(pruned.examples) == len(full.examples) - 1
        assert all(e.utterance != "play my gym playlist" for e in pruned.examples)

    def test_templated_proposal_none_when_nothing_to_generate(self, toy_ontology):
        bug = _bug("pause the music", "[IN:PAUSE_MUSIC pause the music ]")
        assert templated_proposal(bug, toy_ontology, Gazetteer({})) is None

    def test_proposal_rejects_oversized_example_list(self):
        examples = tuple(
            TrainingExample(f"say word{i}", parse_frame(f"[IN:UNSUPPORTED say word{i} ]"))
            for i in range(MAX_EXAMPLES_PER_PROPOSAL + 1)
        )
        with pytest.raises(ValueError):
            AugmentationProposal(
                id="p", source_bug_id="b", strategy=ProposalStrategy.TEMPLATED, examples=examples
            )


class TestGazetteer:
    def test_round_trip_dict(self, gazetteers):
        doc = gazetteers.to_dict()
        again = gazetteer_from_dict(doc)
        assert again.values == gazetteers.values
        assert again.contains("LOCATION", ("new", "york"))

    def test_merge_unions_without_duplicates(self):
        a = Gazetteer({"CONTACT": (("bob",),)})
        a.merge(Gazetteer({"CONTACT": (("bob",), ("dana",)), "LOCATION": (("rome",),)}))
        assert a.values["CONTACT"] == (("bob",), ("dana",))
        assert a.has("LOCATION")


class TestRules:
    def test_generate_and_match(self):
        golden = parse_frame("[IN:PAUSE_MUSIC stop the song ]")
        rule = generate_rule("stop the song", golden)
        assert rule.id.startswith("rule-")
        store = RuleStore()
        store.add(rule)
        assert store.match("STOP the  Song") is rule
        assert store.match("stop the songs") is None

    def test_rule_id_is_stable_across_case(self):
        golden1 = parse_frame("[IN:PAUSE_MUSIC stop the song ]")
        golden2 = parse_frame("[IN:PAUSE_MUSIC Stop The Song ]")
        assert generate_rule("stop the song", golden1).id == generate_rule(
            "Stop The Song", golden2
        ).id

    def test_rule_requires_matching_tokens(self):
        with pytest.raises(TokenMismatchError):
            generate_rule("stop the song", parse_frame("[IN:PAUSE_MUSIC stop it ]"))

    def test_duplicate_rejected_unless_replace(self):
        store = RuleStore()
        first = generate_rule("stop the song", parse_frame("[IN:PAUSE_MUSIC stop the song ]"))
        store.add(first)
        second = generate_rule(
            "Stop The Song", parse_frame("[IN:UNSUPPORTED Stop The Song ]"), rule_id="r2"
        )
        with pytest.raises(DuplicateRuleError):
            store.add(second)
        store.add(second, replace=True)
        assert store.match("stop the song").id == "r2"
        assert len(store) == 1

    def test_rules_fire_only_on_their_own_utterance(self):
        store = RuleStore()
        texts = [f"do thing number{i}" for i in range(20)]
        for text in texts:
            store.add(generate_rule(text, parse_frame(f"[IN:UNSUPPORTED {text} ]")))
        for i, text in enumerate(texts):
            rule = store.match(text)
            assert rule is not None and rule.utterance == text
        assert store.match("do thing number99") is None


class TestTransforms:
    def _dataset(self):
        return [
            TrainingExample(
                "play some jazz", parse_frame("[IN:PLAY_MUSIC play some jazz ]")
            ),
            TrainingExample(
                "call dad now",
                parse_frame("[IN:CREATE_CALL call [SL:CONTACT dad ] now ]"),
            ),
            TrainingExample("pause it", parse_frame("[IN:PAUSE_MUSIC pause it ]")),
        ]

    @staticmethod
    def _fingerprint(dataset):
        return [(e.utterance, serialize_frame(e.frame), e.weight) for e in dataset]

    def test_rename_intent_and_inverse_round_trip(self, toy_ontology):
        dataset = self._dataset()
        spec = TransformSpec(TransformOp.RENAME_INTENT, "PAUSE_MUSIC", "PLAY_MUSIC")
        renamed, changed = apply_transform(dataset, spec, toy_ontology)
        assert changed == 1
        assert renamed[0].frame.label == "PAUSE_MUSIC"
        back, changed_back = apply_transform(
            renamed,
            TransformSpec(TransformOp.RENAME_INTENT, "PLAY_MUSIC", "PAUSE_MUSIC"),
            toy_ontology,
        )
        # the original PAUSE_MUSIC example flips too, so restrict by scope
        assert changed_back == 2
        scoped_back, _ = apply_transform(
            renamed,
            TransformSpec(
                TransformOp.RENAME_INTENT,
                "PLAY_MUSIC",
                "PAUSE_MUSIC",
                scope=TransformScope(phrase="jazz"),
            ),
            toy_ontology,
        )
        assert self._fingerprint(scoped_back) == self._fingerprint(dataset)

    def test_rename_slot(self, toy_ontology):
        dataset = self._dataset()
        spec = TransformSpec(TransformOp.RENAME_SLOT, "MESSAGE", "CONTACT")
        out, changed = apply_transform(dataset, spec, toy_ontology)
        assert changed == 1
        assert serialize_frame(out[1].frame) == (
            "[IN:CREATE_CALL call [SL:MESSAGE dad ] now ]"
        )

    def test_add_slot_wrap_wraps_free_tokens_only(self, toy_ontology):
        dataset = [
            TrainingExample(
                "call dad and dad again",
                parse_frame("[IN:CREATE_CALL call [SL:CONTACT dad ] and dad again ]"),
            )
        ]
        spec = TransformSpec(
            TransformOp.ADD_SLOT_WRAP, "CONTACT", scope=TransformScope(phrase="dad")
        )
        out, changed = apply_transform(dataset, spec, toy_ontology)
        assert changed == 1
        assert serialize_frame(out[0].frame) == (
            "[IN:CREATE_CALL call [SL:CONTACT dad ] and [SL:CONTACT dad ] again ]"
        )

    def test_transforms_preserve_tokens(self, toy_ontology):
        dataset = self._dataset()
        for spec in (
            TransformSpec(TransformOp.RENAME_INTENT, "PAUSE_MUSIC", "PLAY_MUSIC"),
            TransformSpec(TransformOp.RENAME_SLOT, "MESSAGE", "CONTACT"),
            TransformSpec(
                TransformOp.ADD_SLOT_WRAP, "CONTACT", scope=TransformScope(phrase="now")
            ),
        ):
            out, _ = apply_transform(dataset, spec, toy_ontology)
            for before, after in zip(dataset, out):
                assert before.frame.tokens() == after.frame.tokens()

    def test_scope_filters(self):
        example = TrainingExample(
            "call dad now", parse_frame("[IN:CREATE_CALL call dad now ]")
        )
        assert TransformScope().covers(example)
        assert TransformScope(intent="CREATE_CALL").covers(example)
        assert not TransformScope(intent="PLAY_MUSIC").covers(example)
        assert TransformScope(phrase="dad now").covers(example)
        assert not TransformScope(phrase="now dad").covers(example)

    def test_out_of_scope_examples_pass_through_unchanged(self, toy_ontology):
        dataset = self._dataset()
        spec = TransformSpec(
            TransformOp.RENAME_INTENT,
            "PAUSE_MUSIC",
            "PLAY_MUSIC",
            scope=TransformScope(intent="CREATE_CALL"),
        )
        out, changed = apply_transform(dataset, spec, toy_ontology)
        assert changed == 0
        assert self._fingerprint(out) == self._fingerprint(dataset)

    def test_validation_rejects_unknown_labels(self, toy_ontology):
        with pytest.raises(InvalidTargetLabelError):
            apply_transform(
                [], TransformSpec(TransformOp.RENAME_INTENT, "NOT_REAL", "PLAY_MUSIC"), toy_ontology
            )
        with pytest.raises(InvalidTargetLabelError):
            apply_transform(
                [], TransformSpec(TransformOp.RENAME_SLOT, "NOT_REAL", "CONTACT"), toy_ontology
            )
        with pytest.raises(InvalidTargetLabelError):
            apply_transform(
                [], TransformSpec(TransformOp.RENAME_SLOT, "CONTACT"), toy_ontology
            )
        with pytest.raises(InvalidTargetLabelError):
            apply_transform(
                [], TransformSpec(TransformOp.ADD_SLOT_WRAP, "CONTACT"), toy_ontology
            )
