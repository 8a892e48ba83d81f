"""Root cause attribution for graded bugs.

Each bug is explained by the first check that fires, in a fixed order:

1. RuleMismatch: a deterministic rule fires on the utterance and its parse
   disagrees with the golden frame, so the rule itself is stale.
2. Mislabeled: training contains the exact utterance labeled differently
   from the golden frame and the model was confident, which together point
   at an annotation conflict rather than a modeling gap.
3. LowTrainingData: training contains no exact match at all.
4. Unknown: everything else.

Each category maps to one suggested correction, which review surfaces
display verbatim.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Union

from .frames import serialize_frame
from .records import Normalization, TrainingExample, normalize

if TYPE_CHECKING:
    from .correction import RuleStore
    from .store import Bug


class AttributionCategory(str, Enum):
    RULE_MISMATCH = "rule_mismatch"
    MISLABELED = "mislabeled"
    LOW_TRAINING_DATA = "low_training_data"
    UNKNOWN = "unknown"


CORRECTION_ACTIONS = {
    AttributionCategory.RULE_MISMATCH: "Fix Rule",
    AttributionCategory.MISLABELED: "Fix Annotation Conflicts",
    AttributionCategory.LOW_TRAINING_DATA: "Generate Data",
    AttributionCategory.UNKNOWN: "Generate Rule",
}


@dataclass(frozen=True)
class RuleConflictEvidence:
    rule_id: str
    rule_frame: str


@dataclass(frozen=True)
class MislabelEvidence:
    conflicting: tuple[TrainingExample, ...]
    confidence: float


@dataclass(frozen=True)
class TrainingGapEvidence:
    normalized_utterance: str
    training_matches: int = 0


Evidence = Union[RuleConflictEvidence, MislabelEvidence, TrainingGapEvidence, None]


@dataclass(frozen=True)
class ErrorAttribution:
    category: AttributionCategory
    evidence: Evidence = None

    @property
    def suggested_action(self) -> str:
        return CORRECTION_ACTIONS[self.category]


@dataclass(frozen=True)
class AttributionConfig:
    """mislabel_threshold is the confidence floor for calling a conflict a
    mislabel; below it a confident-sounding conflict stays Unknown."""

    mislabel_threshold: float = 0.9
    normalization: Normalization = Normalization.FOLD_CASE_AND_WHITESPACE

    def __post_init__(self) -> None:
        if not 0.0 <= self.mislabel_threshold <= 1.0:
            raise ValueError(
                f"mislabel_threshold out of [0, 1]: {self.mislabel_threshold}"
            )


@dataclass
class TrainingIndex:
    """Exact match lookup over training utterances, insertion ordered.

    conflicts lists normalized texts that carry more than one distinct frame;
    such duplicates are reported, not rejected, because they are exactly the
    signal the Mislabeled check keys on.
    """

    normalization: Normalization
    buckets: dict[str, list[TrainingExample]] = field(default_factory=dict)
    conflicts: list[str] = field(default_factory=list)

    def lookup(self, utterance: str) -> list[TrainingExample]:
        return self.buckets.get(normalize(utterance, self.normalization), [])

    def __len__(self) -> int:
        return sum(len(bucket) for bucket in self.buckets.values())


def build_training_index(
    dataset: list[TrainingExample],
    config: AttributionConfig = AttributionConfig(),
) -> TrainingIndex:
    index = TrainingIndex(normalization=config.normalization)
    for example in dataset:
        key = normalize(example.utterance, config.normalization)
        index.buckets.setdefault(key, []).append(example)
    for key, bucket in index.buckets.items():
        frames = {serialize_frame(example.frame) for example in bucket}
        if len(frames) > 1:
            index.conflicts.append(key)
    return index


def attribute(
    bug: "Bug",
    index: TrainingIndex,
    rules: "RuleStore",
    config: AttributionConfig = AttributionConfig(),
) -> ErrorAttribution:
    """Explain one graded bug.  Checks run in fixed order; first hit wins."""
    if bug.golden_frame is None:
        raise ValueError(f"bug {bug.id} has no golden frame to attribute against")
    golden = serialize_frame(bug.golden_frame)

    rule = rules.match(bug.utterance) if rules is not None else None
    if rule is not None and serialize_frame(rule.frame) != golden:
        return ErrorAttribution(
            AttributionCategory.RULE_MISMATCH,
            RuleConflictEvidence(rule_id=rule.id, rule_frame=serialize_frame(rule.frame)),
        )

    matches = index.lookup(bug.utterance)
    conflicting = tuple(
        example for example in matches if serialize_frame(example.frame) != golden
    )
    confidence = bug.intent_confidence
    if conflicting and confidence >= config.mislabel_threshold:
        return ErrorAttribution(
            AttributionCategory.MISLABELED,
            MislabelEvidence(conflicting=conflicting, confidence=confidence),
        )

    if not matches:
        return ErrorAttribution(
            AttributionCategory.LOW_TRAINING_DATA,
            TrainingGapEvidence(
                normalized_utterance=normalize(bug.utterance, config.normalization)
            ),
        )

    return ErrorAttribution(AttributionCategory.UNKNOWN)
