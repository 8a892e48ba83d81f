"""Record types shared across the pipeline: logged traffic and training data."""

from __future__ import annotations

import math
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum

from .frames import Frame, TokenMismatchError


class Normalization(str, Enum):
    """How utterance text is canonicalized before exact comparison."""

    EXACT = "exact"
    FOLD_CASE_AND_WHITESPACE = "fold_case_and_whitespace"


def normalize(text: str, mode: Normalization = Normalization.FOLD_CASE_AND_WHITESPACE) -> str:
    if mode is Normalization.EXACT:
        return text
    return " ".join(text.split()).casefold()


class DialogAct(str, Enum):
    """Terminal dialog act of a logged request, the task success proxy."""

    INFORM = "inform"
    ERROR = "error"
    OTHER = "other"


def iso_from_ts(ts: float) -> str:
    """Epoch seconds to UTC ISO-8601, microsecond precision."""
    return datetime.fromtimestamp(ts, tz=timezone.utc).isoformat()


def ts_from_iso(text: str) -> float:
    return datetime.fromisoformat(text).timestamp()


def quantize_ts(ts: float) -> float:
    """Clamp a timestamp to what the ISO wire format can represent."""
    return ts_from_iso(iso_from_ts(ts))


@dataclass(frozen=True)
class TrainingExample:
    """One labeled utterance.  Weight acts as a duplication count."""

    utterance: str
    frame: Frame
    weight: int = 1

    def __post_init__(self) -> None:
        if self.weight < 1:
            raise ValueError(f"weight must be at least 1, got {self.weight}")
        if tuple(self.utterance.split()) != self.frame.tokens():
            raise TokenMismatchError(
                f"frame tokens do not reproduce the utterance {self.utterance!r}"
            )


@dataclass(frozen=True)
class LoggedRequest:
    """One deduplicated row of production traffic with its logged parse.

    intent_confidence is the model score for the top level intent; None or
    NaN means the score was not logged.  timestamp is UTC epoch seconds.
    """

    id: str
    utterance: str
    predicted_frame: Frame
    intent_confidence: float | None
    frequency: int
    final_dialog_act: DialogAct
    timestamp: float

    def __post_init__(self) -> None:
        if self.frequency < 1:
            raise ValueError(f"frequency must be at least 1, got {self.frequency}")
        c = self.intent_confidence
        if c is not None and not math.isnan(c) and not 0.0 <= c <= 1.0:
            raise ValueError(f"intent_confidence out of [0, 1]: {c}")
        if tuple(self.utterance.split()) != self.predicted_frame.tokens():
            raise TokenMismatchError(
                f"predicted frame does not annotate the utterance {self.utterance!r}"
            )
