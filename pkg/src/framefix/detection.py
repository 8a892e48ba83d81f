"""Surfacing likely bugs from logged traffic.

The core signal is least-confidence uncertainty sampling: score each logged
request by one minus the model's confidence in the top level intent and
review the k highest scorers.  A seeded uniform sample is kept alongside as
the control arm.  Task failure is proxied by the final dialog act: anything
other than Inform counts as a failed interaction.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field, replace
from enum import Enum

from .frames import Frame, is_bug
from .records import DialogAct, LoggedRequest


class SamplingStrategy(str, Enum):
    RANDOM = "random"
    LEAST_CONFIDENCE = "least_confidence"


class RankingKey(str, Enum):
    UNCERTAINTY = "uncertainty"
    FREQUENCY = "frequency"
    RECENCY = "recency"


class EmptyPoolError(ValueError):
    """Sampling was asked to draw from an empty pool."""


class ScoreOutOfRangeError(ValueError):
    """A histogram input fell outside [0, 1]."""


@dataclass(frozen=True)
class SamplingConfig:
    k: int
    pool_size: int
    strategy: SamplingStrategy = SamplingStrategy.LEAST_CONFIDENCE
    ranking: RankingKey = RankingKey.UNCERTAINTY
    seed: int = 0

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")
        if self.pool_size < 1:
            raise ValueError(f"pool_size must be at least 1, got {self.pool_size}")
        if self.k > self.pool_size:
            raise ValueError(f"k ({self.k}) cannot exceed pool_size ({self.pool_size})")


def uncertainty_score(record: LoggedRequest) -> float:
    """1 - confidence of the top level intent; missing or NaN scores as 1.0."""
    c = record.intent_confidence
    if c is None or math.isnan(c):
        return 1.0
    return 1.0 - c


def task_success_proxy(record: LoggedRequest) -> bool:
    """A request counts as successful when the dialog ended in Inform."""
    return record.final_dialog_act is DialogAct.INFORM


def dedupe_pool(pool: list[LoggedRequest]) -> list[LoggedRequest]:
    """Merge duplicate utterances before sampling so k counts unique texts.

    Duplicates merge with summed frequency, the latest timestamp, and the
    maximum confidence; the frame and dialog act come from the latest record.
    Output order follows first appearance of each utterance.
    """
    merged: dict[str, LoggedRequest] = {}
    for record in pool:
        seen = merged.get(record.utterance)
        if seen is None:
            merged[record.utterance] = record
            continue
        base = record if record.timestamp >= seen.timestamp else seen
        confidences = [
            c
            for c in (seen.intent_confidence, record.intent_confidence)
            if c is not None and not math.isnan(c)
        ]
        merged[record.utterance] = replace(
            base,
            frequency=seen.frequency + record.frequency,
            intent_confidence=max(confidences) if confidences else None,
            timestamp=max(seen.timestamp, record.timestamp),
        )
    return list(merged.values())


def _ranking_sort(records: list[LoggedRequest], ranking: RankingKey) -> list[LoggedRequest]:
    if ranking is RankingKey.UNCERTAINTY:
        key = lambda r: (-uncertainty_score(r), -r.frequency, r.utterance)
    elif ranking is RankingKey.FREQUENCY:
        key = lambda r: (-r.frequency, -uncertainty_score(r), r.utterance)
    else:
        key = lambda r: (-r.timestamp, -r.frequency, r.utterance)
    return sorted(records, key=key)


def sample_candidates(pool: list[LoggedRequest], config: SamplingConfig) -> list[LoggedRequest]:
    """Pick min(k, unique pool size) candidates for human review.

    Least confidence takes the top scorers with ties broken by higher
    frequency then lexicographic utterance, so the result is independent of
    pool order.  Random draws a seeded uniform sample without replacement.
    Either way the returned list is ordered by the configured ranking key.
    """
    if not pool:
        raise EmptyPoolError("cannot sample from an empty pool")
    unique = dedupe_pool(pool)
    k = min(config.k, len(unique))
    if config.strategy is SamplingStrategy.LEAST_CONFIDENCE:
        ordered = sorted(
            unique,
            key=lambda r: (-uncertainty_score(r), -r.frequency, r.utterance),
        )
        chosen = ordered[:k]
    else:
        rng = random.Random(config.seed)
        indexed = sorted(unique, key=lambda r: r.utterance)
        chosen = rng.sample(indexed, k)
    return _ranking_sort(chosen, config.ranking)


@dataclass(frozen=True)
class HistogramBin:
    lo: float
    hi: float
    count: int


def score_histogram(scores: list[float], bins: int) -> list[HistogramBin]:
    """Equal width histogram over [0, 1]; the last bin includes 1.0."""
    if bins < 1:
        raise ValueError(f"bins must be at least 1, got {bins}")
    edges = [i / bins for i in range(bins + 1)]
    counts = [0] * bins
    for score in scores:
        if not 0.0 <= score <= 1.0:
            raise ScoreOutOfRangeError(f"score out of [0, 1]: {score}")
        idx = min(int(score * bins), bins - 1)
        # guard against float rounding at bin edges
        while idx > 0 and score < edges[idx]:
            idx -= 1
        while idx < bins - 1 and score >= edges[idx + 1]:
            idx += 1
        counts[idx] += 1
    return [HistogramBin(edges[i], edges[i + 1], counts[i]) for i in range(bins)]


@dataclass(frozen=True)
class MisclassificationSplit:
    """Uncertainty scores split by whether the logged parse was wrong."""

    misclassified: tuple[float, ...]
    correct: tuple[float, ...]
    high_uncertainty_fraction: float = field(default=0.0)


def misclassification_split(
    graded: list[tuple[LoggedRequest, Frame]],
    ontology,
) -> MisclassificationSplit:
    """Split graded records into wrong and right parses by frame diff.

    Also reports the fraction of misclassified records whose uncertainty
    score exceeds 0.5, the headline calibration number.
    """
    wrong: list[float] = []
    right: list[float] = []
    for record, golden in graded:
        score = uncertainty_score(record)
        if is_bug(golden, record.predicted_frame, ontology):
            wrong.append(score)
        else:
            right.append(score)
    high = sum(1 for s in wrong if s > 0.5)
    fraction = high / len(wrong) if wrong else 0.0
    return MisclassificationSplit(tuple(wrong), tuple(right), fraction)
