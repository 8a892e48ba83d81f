"""FastAPI review service wrapping a bug store.

One ApiSession owns the store, the current reference model, and a
non-blocking retrain lock; every route works through it.  All error
responses share the {code, message, detail} shape.
"""

from __future__ import annotations

import threading
from pathlib import Path
from typing import Optional, Union

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .. import store as storage
from ..frames import diff_frames, serialize_frame
from ..records import iso_from_ts, ts_from_iso
from ..refmodel import ReferenceModel
from . import schemas
from .diff import diff_segments, highlight_token_spans


class ApiError(Exception):
    def __init__(self, status_code: int, code: str, message: str, detail=None):
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.message = message
        self.detail = detail


class ApiSession:
    """Shared state behind the HTTP surface."""

    def __init__(self, store: storage.Store):
        self.store = store
        self.model: Optional[ReferenceModel] = store.load_model()
        self.retrain_lock = threading.Lock()
        self.last_retrain: Optional[schemas.RetrainResult] = None


_SORTS = {
    "uncertainty": lambda bug: (-bug.uncertainty, bug.id),
    "frequency": lambda bug: (-bug.frequency, bug.id),
    "recency": lambda bug: (-bug.last_update, bug.id),
}


def _summary(bug: storage.Bug) -> schemas.BugSummary:
    return schemas.BugSummary(
        id=bug.id,
        utterance=bug.utterance,
        status=bug.status.value,
        uncertainty=bug.uncertainty,
        frequency=bug.frequency,
        last_update=iso_from_ts(bug.last_update),
        category=bug.attribution.category.value if bug.attribution else None,
        suggested_action=bug.attribution.suggested_action if bug.attribution else None,
        proposal_ids=list(bug.proposals),
        has_golden=bug.golden_frame is not None,
    )


def _detail(bug: storage.Bug) -> schemas.BugDetail:
    return schemas.BugDetail(
        **_summary(bug).model_dump(),
        predicted_frame=serialize_frame(bug.predicted_frame),
        golden_frame=(
            serialize_frame(bug.golden_frame) if bug.golden_frame is not None else None
        ),
        history=[
            schemas.HistoryEntryOut(
                timestamp=iso_from_ts(entry.timestamp),
                status=entry.status.value,
                actor=entry.actor,
            )
            for entry in bug.history
        ],
    )


def _proposal_out(proposal) -> schemas.ProposalOut:
    return schemas.ProposalOut(
        id=proposal.id,
        source_bug_id=proposal.source_bug_id,
        strategy=proposal.strategy.value,
        review_status=proposal.review_status.value,
        example_count=len(proposal.examples),
        examples=[
            schemas.ExampleOut(
                utterance=example.utterance,
                frame=serialize_frame(example.frame),
                weight=example.weight,
            )
            for example in proposal.examples
        ],
    )


def _get_bug(store: storage.Store, bug_id: str) -> storage.Bug:
    try:
        return store.get_bug(bug_id)
    except KeyError:
        raise ApiError(404, "not_found", f"no bug with id {bug_id}") from None


def create_app(root: Union[str, Path]) -> FastAPI:
    return build_app(ApiSession(storage.Store.open(root)))


def build_app(session: ApiSession) -> FastAPI:
    app = FastAPI(title="framefix review service", version="0.1.0")
    app.state.session = session
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def handle_api_error(_request: Request, exc: ApiError):
        body = schemas.ErrorBody(code=exc.code, message=exc.message, detail=exc.detail)
        return JSONResponse(status_code=exc.status_code, content=body.model_dump())

    @app.exception_handler(storage.ValidationError)
    async def handle_validation(_request: Request, exc: storage.ValidationError):
        body = schemas.ErrorBody(code="validation_error", message=str(exc))
        return JSONResponse(status_code=400, content=body.model_dump())

    @app.exception_handler(storage.ReviewConflictError)
    async def handle_review_conflict(_request: Request, exc: storage.ReviewConflictError):
        body = schemas.ErrorBody(code="review_conflict", message=str(exc))
        return JSONResponse(status_code=409, content=body.model_dump())

    @app.exception_handler(storage.IllegalTransitionError)
    async def handle_illegal_transition(
        _request: Request, exc: storage.IllegalTransitionError
    ):
        body = schemas.ErrorBody(code="illegal_transition", message=str(exc))
        return JSONResponse(status_code=409, content=body.model_dump())

    @app.exception_handler(RequestValidationError)
    async def handle_request_validation(_request: Request, exc: RequestValidationError):
        body = schemas.ErrorBody(
            code="invalid_request", message="request validation failed", detail=exc.errors()
        )
        return JSONResponse(status_code=422, content=body.model_dump())

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "bugs": len(session.store.bugs)}

    @app.get("/bugs", response_model=schemas.BugPage)
    def list_bugs(
        sort: str = "frequency",
        status: Optional[str] = None,
        offset: int = 0,
        limit: int = 50,
    ) -> schemas.BugPage:
        if sort not in _SORTS:
            raise ApiError(
                400,
                "bad_sort",
                f"sort must be one of {sorted(_SORTS)}",
                detail={"sort": sort},
            )
        wanted = None
        if status is not None:
            try:
                wanted = storage.BugStatus(status)
            except ValueError:
                raise ApiError(
                    400,
                    "bad_status",
                    f"status must be one of {[s.value for s in storage.BugStatus]}",
                    detail={"status": status},
                ) from None
        if offset < 0 or limit < 1:
            raise ApiError(400, "bad_page", "offset must be >= 0 and limit >= 1")
        bugs = [
            bug
            for bug in session.store.bugs.values()
            if wanted is None or bug.status is wanted
        ]
        bugs.sort(key=_SORTS[sort])
        page = bugs[offset : offset + limit]
        return schemas.BugPage(
            bugs=[_summary(bug) for bug in page],
            total=len(bugs),
            offset=offset,
            limit=limit,
        )

    @app.get("/bugs/{bug_id}", response_model=schemas.BugDetail)
    def get_bug(bug_id: str) -> schemas.BugDetail:
        return _detail(_get_bug(session.store, bug_id))

    @app.get("/bugs/{bug_id}/diff", response_model=schemas.DiffOut)
    def get_diff(bug_id: str) -> schemas.DiffOut:
        bug = _get_bug(session.store, bug_id)
        if bug.golden_frame is None:
            raise ApiError(
                409, "ungraded", f"bug {bug_id} has no golden frame to diff against"
            )
        diff = diff_frames(bug.golden_frame, bug.predicted_frame, session.store.ontology)
        return schemas.DiffOut(
            bug_id=bug.id,
            verdict=diff.verdict.value,
            tokens=list(bug.predicted_frame.tokens()),
            findings=[
                schemas.FindingOut(
                    kind=f.kind.value,
                    slot_label=f.slot_label,
                    expected_span=f.expected_span,
                    predicted_span=f.predicted_span,
                    expected_label=f.expected_label,
                    predicted_label=f.predicted_label,
                )
                for f in diff.findings
            ],
            expected_serialized=serialize_frame(bug.golden_frame),
            predicted_serialized=serialize_frame(bug.predicted_frame),
            expected_segments=[
                schemas.SegmentOut(text=text, highlight=on)
                for text, on in diff_segments(bug.golden_frame, diff.findings, "expected")
            ],
            predicted_segments=[
                schemas.SegmentOut(text=text, highlight=on)
                for text, on in diff_segments(
                    bug.predicted_frame, diff.findings, "predicted"
                )
            ],
            expected_token_spans=highlight_token_spans(diff.findings, "expected"),
            predicted_token_spans=highlight_token_spans(diff.findings, "predicted"),
        )

    @app.get("/proposals", response_model=schemas.ProposalPage)
    def list_proposals(status: Optional[str] = None) -> schemas.ProposalPage:
        wanted = None
        if status is not None:
            try:
                wanted = storage.ReviewStatus(status)
            except ValueError:
                raise ApiError(
                    400,
                    "bad_status",
                    f"status must be one of {[s.value for s in storage.ReviewStatus]}",
                    detail={"status": status},
                ) from None
        proposals = [
            proposal
            for proposal in session.store.proposal_map.values()
            if wanted is None or proposal.review_status is wanted
        ]
        proposals.sort(key=lambda p: p.id)
        return schemas.ProposalPage(
            proposals=[_proposal_out(p) for p in proposals], total=len(proposals)
        )

    @app.post("/proposals/{proposal_id}/review", response_model=schemas.ReviewResult)
    def review_proposal(proposal_id: str, body: schemas.ReviewRequest) -> schemas.ReviewResult:
        try:
            proposal = session.store.get_proposal(proposal_id)
        except KeyError:
            raise ApiError(
                404, "not_found", f"no proposal with id {proposal_id}"
            ) from None
        session.store.review_proposal(proposal_id, accept=body.action == "accept")
        bug = _get_bug(session.store, proposal.source_bug_id)
        return schemas.ReviewResult(
            proposal=_proposal_out(proposal),
            bug_id=bug.id,
            bug_status=bug.status.value,
            training_size=len(session.store.load_training()),
        )

    @app.post("/retrain", response_model=schemas.RetrainResult)
    def retrain() -> schemas.RetrainResult:
        if not session.retrain_lock.acquire(blocking=False):
            raise ApiError(409, "retrain_in_progress", "another retrain is running")
        try:
            model = session.store.retrain()
            session.model = model
            result = schemas.RetrainResult(
                examples=len(session.store.load_training()),
                exact_entries=len(model.exact_table),
                patterns=len(model.bank),
            )
            session.last_retrain = result
            return result
        finally:
            session.retrain_lock.release()

    @app.get("/retrain/status", response_model=schemas.RetrainStatus)
    def retrain_status() -> schemas.RetrainStatus:
        state = "running" if session.retrain_lock.locked() else "idle"
        return schemas.RetrainStatus(state=state, last=session.last_retrain)

    @app.post("/verify", response_model=schemas.VerifyResult)
    def verify() -> schemas.VerifyResult:
        if session.model is None:
            raise ApiError(409, "no_model", "no trained model; call /retrain first")
        verified, recurred = session.store.verify_sweep(session.model)
        return schemas.VerifyResult(
            verified=verified, recurred=recurred, swept=len(verified) + len(recurred)
        )

    @app.get("/report", response_model=schemas.ReportOut)
    def report(
        window_start: Optional[str] = None, window_end: Optional[str] = None
    ) -> schemas.ReportOut:
        def parse(value: Optional[str], name: str) -> Optional[float]:
            if value is None:
                return None
            try:
                return ts_from_iso(value)
            except ValueError:
                raise ApiError(
                    400,
                    "bad_window",
                    f"{name} must be an ISO-8601 timestamp",
                    detail={name: value},
                ) from None

        start = parse(window_start, "window_start")
        end = parse(window_end, "window_end")
        snapshot = session.store.ledger_report(start, end)
        return schemas.ReportOut(
            counts=dict(snapshot.counts),
            total=snapshot.total,
            fixes=snapshot.fixes,
            recurrences=list(snapshot.recurrences),
            window_start=iso_from_ts(start) if start is not None else None,
            window_end=iso_from_ts(end) if end is not None else None,
        )

    return app
