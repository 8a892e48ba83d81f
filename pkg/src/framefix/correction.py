"""Turning attributed bugs into fixes.

Three fix families, mirroring the attribution categories:

* data generation for coverage gaps: lift the golden frame into templates by
  replacing open class slot spans with placeholders, then expand each
  template with gazetteer values into fresh weight 1 training examples, plus
  one weight 5 exact copy of the bug utterance itself;
* deterministic rules for stubborn single utterances: an exact trigger that
  pins the parse of one normalized utterance;
* bulk label transforms for annotation cleanups: scoped renames of intent or
  slot labels, or wrapping a token phrase in a new slot, across a dataset.

All generated data lands as review proposals; nothing edits training until
a reviewer (or an explicit auto-accept flag) says so.
"""

from __future__ import annotations

import hashlib
import itertools
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Iterator, Optional

from .frames import (
    Frame,
    Slot,
    TokenMismatchError,
    leaf_slots,
    replace_slot_tokens,
    serialize_frame,
)
from .ontology import Ontology
from .records import Normalization, TrainingExample, normalize

if TYPE_CHECKING:
    from .attribution import TrainingIndex
    from .store import Bug

MAX_TEMPLATES_PER_BUG = 5
MAX_EXPANSIONS_PER_TEMPLATE = 10
MAX_EXAMPLES_PER_PROPOSAL = MAX_TEMPLATES_PER_BUG * MAX_EXPANSIONS_PER_TEMPLATE


class MissingGazetteerError(ValueError):
    """A template bound a slot that no gazetteer supplies values for."""


class InvalidTargetLabelError(ValueError):
    """A transform named a label the ontology does not define."""


class DuplicateRuleError(ValueError):
    """A second rule was added for the same normalized utterance."""


def placeholder_token(slot_label: str) -> str:
    return f"<SL:{slot_label}>"


def is_placeholder(token: str) -> bool:
    return token.startswith("<SL:") and token.endswith(">") and len(token) > 6


def placeholder_label(token: str) -> str:
    return token[len("<SL:"):-1]


@dataclass(frozen=True)
class Template:
    """A bug utterance with some slot spans replaced by placeholders.

    pattern is the token sequence with one placeholder token standing in for
    each replaced span; frame is the golden frame with the same replacement
    applied, so expansion only ever swaps slot contents.  slot_paths locate
    the replaced slots in frame, in document order.
    """

    pattern: tuple[str, ...]
    bound_slots: tuple[str, ...]
    source_bug_id: str
    source_utterance: str
    frame: Frame
    slot_paths: tuple[tuple[int, ...], ...]


class ProposalStrategy(str, Enum):
    EXACT_MATCH = "exact_match"
    TEMPLATED = "templated"


class ReviewStatus(str, Enum):
    PENDING = "pending"
    ACCEPTED = "accepted"
    REJECTED = "rejected"


@dataclass
class AugmentationProposal:
    """A reviewable batch of generated training examples for one bug."""

    id: str
    source_bug_id: str
    strategy: ProposalStrategy
    examples: tuple[TrainingExample, ...]
    review_status: ReviewStatus = ReviewStatus.PENDING

    def __post_init__(self) -> None:
        if len(self.examples) > MAX_EXAMPLES_PER_PROPOSAL:
            raise ValueError(
                f"proposal {self.id} carries {len(self.examples)} examples, "
                f"limit is {MAX_EXAMPLES_PER_PROPOSAL}"
            )


@dataclass
class Gazetteer:
    """Candidate value token sequences per slot label."""

    values: dict[str, tuple[tuple[str, ...], ...]] = field(default_factory=dict)

    def values_for(self, slot_label: str) -> tuple[tuple[str, ...], ...]:
        found = self.values.get(slot_label, ())
        if not found:
            raise MissingGazetteerError(f"no gazetteer values for slot {slot_label}")
        return found

    def has(self, slot_label: str) -> bool:
        return bool(self.values.get(slot_label))

    def contains(self, slot_label: str, tokens: tuple[str, ...]) -> bool:
        return tokens in set(self.values.get(slot_label, ()))

    def merge(self, other: "Gazetteer") -> None:
        for label, vals in other.values.items():
            mine = list(self.values.get(label, ()))
            for val in vals:
                if val not in mine:
                    mine.append(val)
            self.values[label] = tuple(mine)

    def to_dict(self) -> dict[str, list[str]]:
        return {label: [" ".join(v) for v in vals] for label, vals in self.values.items()}


def gazetteer_from_dict(doc: dict) -> Gazetteer:
    values = {
        label: tuple(tuple(v.split()) for v in vals) for label, vals in doc.items()
    }
    return Gazetteer(values)


def extract_templates(
    bug: "Bug",
    ontology: Ontology,
    max_templates: int = MAX_TEMPLATES_PER_BUG,
) -> list[Template]:
    """Templates for every non-empty subset of the bug's templatable slots.

    Only leaf slots (no nested intent inside) marked templatable in the
    ontology take part.  Subsets are enumerated smallest first, within a
    size in document order of the slots, and the list is cut off at
    max_templates.  A bug with no templatable slots yields no templates.
    """
    if bug.golden_frame is None:
        raise ValueError(f"bug {bug.id} has no golden frame to template")
    golden = bug.golden_frame
    instances = [
        (path, slot, span)
        for path, slot, span in leaf_slots(golden)
        if slot.label in ontology.slots and ontology.is_templatable(slot.label)
    ]
    templates: list[Template] = []
    for size in range(1, len(instances) + 1):
        for combo in itertools.combinations(range(len(instances)), size):
            if len(templates) >= max_templates:
                return templates
            frame = golden
            for idx in combo:
                path, slot, _span = instances[idx]
                frame = replace_slot_tokens(frame, path, (placeholder_token(slot.label),))
            templates.append(
                Template(
                    pattern=frame.tokens(),
                    bound_slots=tuple(instances[idx][1].label for idx in combo),
                    source_bug_id=bug.id,
                    source_utterance=bug.utterance,
                    frame=frame,
                    slot_paths=tuple(instances[idx][0] for idx in combo),
                )
            )
    return templates


def _combo_stream(
    counts: list[int], rng: random.Random, want: int
) -> Iterator[tuple[int, ...]]:
    total = 1
    for c in counts:
        total *= c
    if total <= max(1024, 8 * want):
        combos = list(itertools.product(*(range(c) for c in counts)))
        rng.shuffle(combos)
        yield from combos
    else:
        seen: set[tuple[int, ...]] = set()
        for _ in range(50 * want):
            combo = tuple(rng.randrange(c) for c in counts)
            if combo in seen:
                continue
            seen.add(combo)
            yield combo


def expand_template(
    template: Template,
    gazetteers: Gazetteer,
    max_expansions: int = MAX_EXPANSIONS_PER_TEMPLATE,
    seed: int = 0,
) -> list[TrainingExample]:
    """Up to max_expansions weight 1 examples with gazetteer values filled in.

    Value combinations are drawn seeded-random without repeats, expansion
    texts are pairwise distinct, and no expansion reproduces the source bug
    utterance, so accepting a templated proposal never smuggles in the exact
    fix (that is the exact match proposal's job).
    """
    value_sets = [gazetteers.values_for(label) for label in template.bound_slots]
    rng = random.Random(seed)
    examples: list[TrainingExample] = []
    seen_texts = {template.source_utterance}
    for combo in _combo_stream([len(v) for v in value_sets], rng, max_expansions):
        frame = template.frame
        for path, value_idx, values in zip(template.slot_paths, combo, value_sets):
            frame = replace_slot_tokens(frame, path, values[value_idx])
        text = " ".join(frame.tokens())
        if text in seen_texts:
            continue
        seen_texts.add(text)
        examples.append(TrainingExample(text, frame, weight=1))
        if len(examples) >= max_expansions:
            break
    return examples


def exact_match_proposal(bug: "Bug") -> AugmentationProposal:
    """One pending proposal holding the bug utterance itself at weight 5."""
    if bug.golden_frame is None:
        raise ValueError(f"bug {bug.id} has no golden frame to propose from")
    example = TrainingExample(bug.utterance, bug.golden_frame, weight=5)
    return AugmentationProposal(
        id=f"{bug.id}-exact",
        source_bug_id=bug.id,
        strategy=ProposalStrategy.EXACT_MATCH,
        examples=(example,),
    )


def templated_proposal(
    bug: "Bug",
    ontology: Ontology,
    gazetteers: Gazetteer,
    max_templates: int = MAX_TEMPLATES_PER_BUG,
    max_expansions: int = MAX_EXPANSIONS_PER_TEMPLATE,
    seed: int = 0,
    existing: Optional["TrainingIndex"] = None,
) -> Optional[AugmentationProposal]:
    """Extract, expand, and bundle; None when nothing new can be generated.

    Examples already present in the existing training index (by normalized
    text) are dropped rather than proposed twice.
    """
    templates = extract_templates(bug, ontology, max_templates)
    examples: list[TrainingExample] = []
    seen: set[str] = set()
    for idx, template in enumerate(templates):
        for example in expand_template(template, gazetteers, max_expansions, seed=seed + idx):
            if example.utterance in seen:
                continue
            if existing is not None and existing.lookup(example.utterance):
                continue
            seen.add(example.utterance)
            examples.append(example)
    if not examples:
        return None
    return AugmentationProposal(
        id=f"{bug.id}-templated",
        source_bug_id=bug.id,
        strategy=ProposalStrategy.TEMPLATED,
        examples=tuple(examples[:MAX_EXAMPLES_PER_PROPOSAL]),
    )


@dataclass(frozen=True)
class Rule:
    """Exact utterance trigger that pins a parse deterministically."""

    id: str
    utterance: str
    frame: Frame


def generate_rule(
    utterance: str,
    golden: Frame,
    rule_id: str | None = None,
    normalization: Normalization = Normalization.FOLD_CASE_AND_WHITESPACE,
) -> Rule:
    """A rule that fires on exactly this normalized utterance."""
    if tuple(utterance.split()) != golden.tokens():
        raise TokenMismatchError(
            f"golden frame does not annotate the utterance {utterance!r}"
        )
    if rule_id is None:
        digest = hashlib.sha1(normalize(utterance, normalization).encode("utf-8"))
        rule_id = "rule-" + digest.hexdigest()[:12]
    return Rule(id=rule_id, utterance=utterance, frame=golden)


@dataclass
class RuleStore:
    """At most one rule per normalized utterance."""

    normalization: Normalization = Normalization.FOLD_CASE_AND_WHITESPACE
    rules: dict[str, Rule] = field(default_factory=dict)

    def add(self, rule: Rule, replace: bool = False) -> None:
        key = normalize(rule.utterance, self.normalization)
        if key in self.rules and not replace:
            raise DuplicateRuleError(
                f"a rule already exists for {rule.utterance!r}: {self.rules[key].id}"
            )
        self.rules[key] = rule

    def match(self, utterance: str) -> Rule | None:
        return self.rules.get(normalize(utterance, self.normalization))

    def __len__(self) -> int:
        return len(self.rules)

    def __iter__(self) -> Iterator[Rule]:
        return iter(self.rules.values())


class TransformOp(str, Enum):
    RENAME_INTENT = "rename_intent"
    RENAME_SLOT = "rename_slot"
    ADD_SLOT_WRAP = "add_slot_wrap"


@dataclass(frozen=True)
class TransformScope:
    """Limits which examples a transform touches.

    intent filters on the root intent label; phrase, when set, requires the
    utterance to contain that token phrase (and for AddSlotWrap names the
    phrase to wrap).
    """

    intent: str | None = None
    phrase: str | None = None

    def covers(self, example: TrainingExample) -> bool:
        if self.intent is not None and example.frame.label != self.intent:
            return False
        if self.phrase is not None:
            if not _find_phrase(tuple(example.utterance.split()), tuple(self.phrase.split())):
                return False
        return True


def _find_phrase(tokens: tuple[str, ...], phrase: tuple[str, ...]) -> bool:
    if not phrase:
        return False
    for i in range(len(tokens) - len(phrase) + 1):
        if tokens[i : i + len(phrase)] == phrase:
            return True
    return False


@dataclass(frozen=True)
class TransformSpec:
    op: TransformOp
    to_label: str
    from_label: str | None = None
    scope: TransformScope = TransformScope()

    def validate(self, ontology: Ontology) -> None:
        if self.op is TransformOp.RENAME_INTENT:
            if self.to_label not in ontology.domains:
                raise InvalidTargetLabelError(f"unknown intent label {self.to_label}")
            if self.from_label is None:
                raise InvalidTargetLabelError("rename_intent needs a from_label")
        elif self.op is TransformOp.RENAME_SLOT:
            if self.to_label not in ontology.slots:
                raise InvalidTargetLabelError(f"unknown slot label {self.to_label}")
            if self.from_label is None:
                raise InvalidTargetLabelError("rename_slot needs a from_label")
        else:
            if self.to_label not in ontology.slots:
                raise InvalidTargetLabelError(f"unknown slot label {self.to_label}")
            if not self.scope.phrase:
                raise InvalidTargetLabelError("add_slot_wrap needs a scope phrase to wrap")


def apply_transform(
    dataset: list[TrainingExample],
    spec: TransformSpec,
    ontology: Ontology | None = None,
) -> tuple[list[TrainingExample], int]:
    """Apply one transform across a dataset; returns (new dataset, changed).

    Out of scope examples pass through untouched.  Length and token
    sequences are always preserved; only labels and slot structure change.
    """
    if ontology is not None:
        spec.validate(ontology)
    out: list[TrainingExample] = []
    changed = 0
    for example in dataset:
        if not spec.scope.covers(example):
            out.append(example)
            continue
        new_frame = _transform_frame(example.frame, spec)
        if serialize_frame(new_frame) != serialize_frame(example.frame):
            changed += 1
            out.append(TrainingExample(example.utterance, new_frame, example.weight))
        else:
            out.append(example)
    return out, changed


def _transform_frame(frame: Frame, spec: TransformSpec):
    if spec.op is TransformOp.RENAME_INTENT:
        return _rename(frame, Frame, spec.from_label, spec.to_label)
    if spec.op is TransformOp.RENAME_SLOT:
        return _rename(frame, Slot, spec.from_label, spec.to_label)
    phrase = tuple((spec.scope.phrase or "").split())
    return _wrap_phrase(frame, phrase, spec.to_label)


def _rename(node, node_type, from_label, to_label):
    children = tuple(
        child if isinstance(child, str) else _rename(child, node_type, from_label, to_label)
        for child in node.children
    )
    label = node.label
    if isinstance(node, node_type) and label == from_label:
        label = to_label
    return type(node)(label, children)


def _wrap_phrase(node, phrase: tuple[str, ...], slot_label: str):
    """Wrap free token runs matching phrase, under any intent node."""
    if isinstance(node, Slot):
        children = tuple(
            child if isinstance(child, str) else _wrap_phrase(child, phrase, slot_label)
            for child in node.children
        )
        return Slot(node.label, children)
    new_children: list = []
    i = 0
    kids = node.children
    while i < len(kids):
        run_matches = all(
            i + j < len(kids) and kids[i + j] == phrase[j] for j in range(len(phrase))
        )
        if phrase and isinstance(kids[i], str) and run_matches:
            new_children.append(Slot(slot_label, phrase))
            i += len(phrase)
        elif isinstance(kids[i], str):
            new_children.append(kids[i])
            i += 1
        else:
            new_children.append(_wrap_phrase(kids[i], phrase, slot_label))
            i += 1
    return Frame(node.label, tuple(new_children))
