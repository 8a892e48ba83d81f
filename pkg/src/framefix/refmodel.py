"""A deterministic reference parser for desk-scale experiments.

Prediction walks three stages and never fails:

1. exact table: normalized utterance seen in training returns its highest
   total weight frame (weight acts as a duplication count);
2. template bank: patterns mined from training by generalizing open class
   slot spans, matched with gazetteer values, longest value first;
3. fallback: wrap the whole utterance in the most frequent training intent
   with no slots.

Each stage reports a fixed confidence tier.  The tiers are deliberately
miscalibrated in a controllable way (a fallback parse is usually wrong yet
still claims 0.2, an exact hit on a mislabeled example claims 0.99), which
is what makes the model useful for studying detection under realistic
conditions.  Training is deterministic: the same dataset always dumps byte
identical model files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Union

from .correction import (
    Gazetteer,
    gazetteer_from_dict,
    is_placeholder,
    placeholder_label,
    placeholder_token,
)
from .frames import Frame, Slot, leaf_slots, parse_frame, replace_slot_tokens, serialize_frame
from .ontology import Ontology
from .records import Normalization, TrainingExample, normalize


class EmptyDatasetError(ValueError):
    """Training requires at least one example."""


@dataclass(frozen=True)
class ConfidenceTiers:
    exact: float = 0.99
    template: float = 0.7
    fallback: float = 0.2


@dataclass(frozen=True)
class BankEntry:
    """One mined template: a frame whose generalized slots hold placeholders."""

    frame: Frame
    pattern: tuple[str, ...]
    slot_paths: tuple[tuple[int, ...], ...]

    @property
    def literal_prefix(self) -> int:
        n = 0
        for token in self.pattern:
            if is_placeholder(token):
                break
            n += 1
        return n


@dataclass
class ReferenceModel:
    exact_table: dict[str, Frame]
    bank: tuple[BankEntry, ...]
    intent_prior: str
    gazetteers: Gazetteer
    tiers: ConfidenceTiers = ConfidenceTiers()
    normalization: Normalization = Normalization.FOLD_CASE_AND_WHITESPACE
    _values_sorted: dict[str, tuple[tuple[str, ...], ...]] = field(
        default_factory=dict, repr=False
    )

    def values_longest_first(self, slot_label: str) -> tuple[tuple[str, ...], ...]:
        cached = self._values_sorted.get(slot_label)
        if cached is None:
            raw = self.gazetteers.values.get(slot_label, ())
            cached = tuple(sorted(raw, key=lambda v: (-len(v), v)))
            self._values_sorted[slot_label] = cached
        return cached


def _generalize(example: TrainingExample, ontology: Ontology, gazetteers: Gazetteer):
    """Replace every open class leaf slot with a placeholder; None if no slot
    qualifies (nothing to generalize means nothing to mine)."""
    frame = example.frame
    paths = []
    for path, slot, _span in leaf_slots(frame):
        spec = ontology.slots.get(slot.label)
        if spec is None or not spec.templatable or not gazetteers.has(slot.label):
            continue
        paths.append((path, slot.label))
    if not paths:
        return None
    for path, label in paths:
        frame = replace_slot_tokens(frame, path, (placeholder_token(label),))
    return frame


def _entry_from_frame(frame: Frame) -> BankEntry:
    slot_paths = tuple(
        path
        for path, slot, _span in leaf_slots(frame)
        if len(slot.children) == 1
        and isinstance(slot.children[0], str)
        and is_placeholder(slot.children[0])
    )
    return BankEntry(frame=frame, pattern=frame.tokens(), slot_paths=slot_paths)


def train(
    dataset: list[TrainingExample],
    gazetteers: Gazetteer,
    ontology: Ontology,
    tiers: ConfidenceTiers = ConfidenceTiers(),
    normalization: Normalization = Normalization.FOLD_CASE_AND_WHITESPACE,
) -> ReferenceModel:
    """Build the three prediction stages from a dataset.  Deterministic."""
    if not dataset:
        raise EmptyDatasetError("cannot train on an empty dataset")

    # exact table: per normalized text, the frame with the highest summed
    # weight; weight ties go to the lexicographically smallest serialization
    votes: dict[str, dict[str, int]] = {}
    frames_by_text: dict[str, dict[str, Frame]] = {}
    for example in dataset:
        key = normalize(example.utterance, normalization)
        serialized = serialize_frame(example.frame)
        votes.setdefault(key, {}).setdefault(serialized, 0)
        votes[key][serialized] += example.weight
        frames_by_text.setdefault(key, {})[serialized] = example.frame
    exact_table: dict[str, Frame] = {}
    for key, tally in votes.items():
        best = min(tally.items(), key=lambda item: (-item[1], item[0]))[0]
        exact_table[key] = frames_by_text[key][best]

    # template bank: first occurrence order, deduplicated by serialization
    seen_entries: set[str] = set()
    entries: list[BankEntry] = []
    for example in dataset:
        generalized = _generalize(example, ontology, gazetteers)
        if generalized is None:
            continue
        serialized = serialize_frame(generalized)
        if serialized in seen_entries:
            continue
        seen_entries.add(serialized)
        entries.append(_entry_from_frame(generalized))
    entries.sort(key=lambda entry: -entry.literal_prefix)  # stable: keeps mining order

    prior_votes: dict[str, int] = {}
    for example in dataset:
        prior_votes.setdefault(example.frame.label, 0)
        prior_votes[example.frame.label] += example.weight
    intent_prior = min(prior_votes.items(), key=lambda item: (-item[1], item[0]))[0]

    return ReferenceModel(
        exact_table=exact_table,
        bank=tuple(entries),
        intent_prior=intent_prior,
        gazetteers=gazetteers,
        tiers=tiers,
        normalization=normalization,
    )


def _rebind_tokens(frame: Frame, tokens: list[str]) -> Frame:
    """Same structure, tokens replaced positionally with the query's own."""
    it = iter(tokens)

    def rebuild(node):
        children = tuple(
            next(it) if isinstance(child, str) else rebuild(child)
            for child in node.children
        )
        return type(node)(node.label, children)

    return rebuild(frame)


def _match_pattern(
    model: ReferenceModel, pattern: tuple[str, ...], tokens: list[str]
) -> list[tuple[str, ...]] | None:
    """Align pattern against tokens; placeholders consume gazetteer values,
    longest first, with backtracking.  Returns bindings in pattern order."""
    bindings: list[tuple[str, ...]] = []

    def go(pi: int, ti: int) -> bool:
        if pi == len(pattern):
            return ti == len(tokens)
        tok = pattern[pi]
        if not is_placeholder(tok):
            if ti < len(tokens) and tokens[ti] == tok:
                return go(pi + 1, ti + 1)
            return False
        for value in model.values_longest_first(placeholder_label(tok)):
            width = len(value)
            if tuple(tokens[ti : ti + width]) == value:
                bindings.append(value)
                if go(pi + 1, ti + width):
                    return True
                bindings.pop()
        return False

    return bindings if go(0, 0) else None


def predict(model: ReferenceModel, utterance: str) -> tuple[Frame, float]:
    """Parse any utterance; total by construction."""
    tokens = utterance.split()
    key = normalize(utterance, model.normalization)
    hit = model.exact_table.get(key)
    if hit is not None:
        return _rebind_tokens(hit, tokens), model.tiers.exact

    for entry in model.bank:
        # every placeholder consumes at least one token
        if len(entry.pattern) > len(tokens):
            continue
        first = entry.pattern[0] if entry.pattern else None
        if first is not None and not is_placeholder(first) and (not tokens or tokens[0] != first):
            continue
        bindings = _match_pattern(model, entry.pattern, tokens)
        if bindings is None:
            continue
        frame = entry.frame
        for path, value in zip(entry.slot_paths, bindings):
            frame = replace_slot_tokens(frame, path, value)
        return frame, model.tiers.template

    return Frame(model.intent_prior, tuple(tokens)), model.tiers.fallback


def dump_model(model: ReferenceModel, path: Union[str, Path]) -> None:
    doc = {
        "normalization": model.normalization.value,
        "tiers": {
            "exact": model.tiers.exact,
            "template": model.tiers.template,
            "fallback": model.tiers.fallback,
        },
        "intent_prior": model.intent_prior,
        "exact": {key: serialize_frame(frame) for key, frame in model.exact_table.items()},
        "bank": [serialize_frame(entry.frame) for entry in model.bank],
        "gazetteers": model.gazetteers.to_dict(),
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(doc, handle, indent=2, sort_keys=True)
        handle.write("\n")


def load_model(path: Union[str, Path]) -> ReferenceModel:
    with open(path, "r", encoding="utf-8") as handle:
        doc = json.load(handle)
    tiers = ConfidenceTiers(
        exact=doc["tiers"]["exact"],
        template=doc["tiers"]["template"],
        fallback=doc["tiers"]["fallback"],
    )
    return ReferenceModel(
        exact_table={key: parse_frame(text) for key, text in doc["exact"].items()},
        bank=tuple(_entry_from_frame(parse_frame(text)) for text in doc["bank"]),
        intent_prior=doc["intent_prior"],
        gazetteers=gazetteer_from_dict(doc["gazetteers"]),
        tiers=tiers,
        normalization=Normalization(doc["normalization"]),
    )
