"""Wire models for the review service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    code: str
    message: str
    detail: Optional[object] = None


class HistoryEntryOut(BaseModel):
    timestamp: str
    status: str
    actor: str


class BugSummary(BaseModel):
    id: str
    utterance: str
    status: str
    uncertainty: float
    frequency: int
    last_update: str
    category: Optional[str] = None
    suggested_action: Optional[str] = None
    proposal_ids: list[str] = Field(default_factory=list)
    has_golden: bool = False


class BugPage(BaseModel):
    bugs: list[BugSummary]
    total: int
    offset: int
    limit: int


class BugDetail(BugSummary):
    predicted_frame: str
    golden_frame: Optional[str] = None
    history: list[HistoryEntryOut] = Field(default_factory=list)


class FindingOut(BaseModel):
    kind: str
    slot_label: Optional[str] = None
    expected_span: Optional[tuple[int, int]] = None
    predicted_span: Optional[tuple[int, int]] = None
    expected_label: Optional[str] = None
    predicted_label: Optional[str] = None


class SegmentOut(BaseModel):
    text: str
    highlight: bool


class DiffOut(BaseModel):
    bug_id: str
    verdict: str
    tokens: list[str]
    findings: list[FindingOut]
    expected_serialized: str
    predicted_serialized: str
    expected_segments: list[SegmentOut]
    predicted_segments: list[SegmentOut]
    expected_token_spans: list[tuple[int, int]]
    predicted_token_spans: list[tuple[int, int]]


class ExampleOut(BaseModel):
    utterance: str
    frame: str
    weight: int


class ProposalOut(BaseModel):
    id: str
    source_bug_id: str
    strategy: str
    review_status: str
    example_count: int
    examples: list[ExampleOut]


class ProposalPage(BaseModel):
    proposals: list[ProposalOut]
    total: int


class ReviewRequest(BaseModel):
    action: Literal["accept", "reject"]


class ReviewResult(BaseModel):
    proposal: ProposalOut
    bug_id: str
    bug_status: str
    training_size: int


class RetrainResult(BaseModel):
    examples: int
    exact_entries: int
    patterns: int


class RetrainStatus(BaseModel):
    state: Literal["idle", "running"]
    last: Optional[RetrainResult] = None


class VerifyResult(BaseModel):
    verified: list[str]
    recurred: list[str]
    swept: int


class ReportOut(BaseModel):
    counts: dict[str, int]
    total: int
    fixes: int
    recurrences: list[str]
    window_start: Optional[str] = None
    window_end: Optional[str] = None
