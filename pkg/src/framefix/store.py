"""File backed store for pools, training data, bugs, rules, and proposals.

Layout under one root directory::

    index.json            monotonic bug id counter
    ontology.json         label registry
    model.json            latest trained model, if any
    pool/*.jsonl          logged traffic
    train/*.jsonl         training datasets (accepted fixes land in accepted.jsonl)
    bugs/ledger.jsonl     one line per bug, current state plus full history
    rules/rules.jsonl     deterministic parse rules
    proposals/*.jsonl     augmentation proposals awaiting review
    gazetteers/*.json     slot value lists

All timestamps in files are UTC ISO-8601.  Every mutation rewrites the
affected file through an atomic replace, so a crash can lose the last write
but never corrupt one.  The store assumes a single writer; concurrent
readers just reopen.

Bug lifecycle::

    Detected -> Graded -> Attributed -> FixProposed -> FixApplied -> Verified
                   ^                                        |            |
                   |                                        v            v
                   +---------------------------------- Recurred <--------+

Recurred bugs may re-enter Attributed for another round.  A golden frame is
required from Graded onward, and history is append only.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Union

from . import refmodel
from .attribution import (
    AttributionCategory,
    ErrorAttribution,
    MislabelEvidence,
    RuleConflictEvidence,
    TrainingGapEvidence,
)
from .correction import (
    AugmentationProposal,
    Gazetteer,
    ProposalStrategy,
    ReviewStatus,
    Rule,
    RuleStore,
    gazetteer_from_dict,
)
from .frames import Frame, FrameError, is_bug, parse_frame, serialize_frame
from .ontology import Ontology, load_ontology, save_ontology
from .records import (
    DialogAct,
    LoggedRequest,
    Normalization,
    TrainingExample,
    iso_from_ts,
    normalize,
    quantize_ts,
    ts_from_iso,
)


class ValidationError(ValueError):
    """A record in a data file failed schema or frame validation."""


class IllegalTransitionError(ValueError):
    """A bug was asked to move to a status its current status does not allow."""


class ReviewConflictError(ValueError):
    """A proposal that is no longer pending was reviewed again."""


class BugStatus(str, Enum):
    DETECTED = "detected"
    GRADED = "graded"
    ATTRIBUTED = "attributed"
    FIX_PROPOSED = "fix_proposed"
    FIX_APPLIED = "fix_applied"
    VERIFIED = "verified"
    RECURRED = "recurred"


LEGAL_TRANSITIONS: dict[BugStatus, frozenset[BugStatus]] = {
    BugStatus.DETECTED: frozenset({BugStatus.GRADED}),
    BugStatus.GRADED: frozenset({BugStatus.ATTRIBUTED}),
    BugStatus.ATTRIBUTED: frozenset({BugStatus.FIX_PROPOSED}),
    BugStatus.FIX_PROPOSED: frozenset({BugStatus.FIX_APPLIED}),
    BugStatus.FIX_APPLIED: frozenset({BugStatus.VERIFIED, BugStatus.RECURRED}),
    BugStatus.VERIFIED: frozenset({BugStatus.RECURRED}),
    BugStatus.RECURRED: frozenset({BugStatus.ATTRIBUTED}),
}


@dataclass(frozen=True)
class HistoryEntry:
    timestamp: float
    status: BugStatus
    actor: str


@dataclass
class Bug:
    """One unique wrong (or suspected wrong) utterance working through the loop."""

    id: str
    utterance: str
    predicted_frame: Frame
    uncertainty: float
    frequency: int
    golden_frame: Optional[Frame] = None
    attribution: Optional[ErrorAttribution] = None
    proposals: list[str] = field(default_factory=list)
    status: BugStatus = BugStatus.DETECTED
    history: list[HistoryEntry] = field(default_factory=list)

    @property
    def intent_confidence(self) -> float:
        return max(0.0, min(1.0, 1.0 - self.uncertainty))

    @property
    def last_update(self) -> float:
        return self.history[-1].timestamp if self.history else 0.0


def new_bug(
    bug_id: str,
    utterance: str,
    predicted_frame: Frame,
    uncertainty: float,
    frequency: int,
    actor: str = "detector",
    timestamp: Optional[float] = None,
) -> Bug:
    ts = quantize_ts(time.time() if timestamp is None else timestamp)
    return Bug(
        id=bug_id,
        utterance=utterance,
        predicted_frame=predicted_frame,
        uncertainty=uncertainty,
        frequency=frequency,
        history=[HistoryEntry(ts, BugStatus.DETECTED, actor)],
    )


def _next_timestamp(bug: Bug, timestamp: Optional[float]) -> float:
    ts = quantize_ts(time.time() if timestamp is None else timestamp)
    if bug.history and ts <= bug.history[-1].timestamp:
        ts = quantize_ts(bug.history[-1].timestamp + 1e-6)
        while ts <= bug.history[-1].timestamp:
            ts = quantize_ts(ts + 1e-6)
    return ts


def transition_bug(
    bug: Bug,
    new_status: BugStatus,
    actor: str,
    timestamp: Optional[float] = None,
) -> Bug:
    """Mutate bug to new_status, appending history.  Raises on illegal moves."""
    allowed = LEGAL_TRANSITIONS[bug.status]
    if new_status not in allowed:
        raise IllegalTransitionError(
            f"bug {bug.id}: {bug.status.value} -> {new_status.value} is not a legal move"
        )
    if new_status is not BugStatus.DETECTED and bug.golden_frame is None:
        raise IllegalTransitionError(
            f"bug {bug.id} cannot leave {bug.status.value} without a golden frame"
        )
    bug.status = new_status
    bug.history.append(HistoryEntry(_next_timestamp(bug, timestamp), new_status, actor))
    return bug


@dataclass(frozen=True)
class LedgerSnapshot:
    """Current status counts plus fix and recurrence activity in a window."""

    counts: dict[str, int]
    total: int
    fixes: int
    recurrences: tuple[str, ...]
    window_start: Optional[float] = None
    window_end: Optional[float] = None


# ---------------------------------------------------------------------------
# wire format helpers


def _require(doc: dict, key: str, where: str):
    if key not in doc:
        raise ValidationError(f"{where}: missing field {key!r}")
    return doc[key]


def _parse_frame_field(doc: dict, key: str, where: str) -> Frame:
    raw = _require(doc, key, where)
    try:
        return parse_frame(raw)
    except FrameError as err:
        raise ValidationError(f"{where}: bad frame in {key!r}: {err}") from err


def request_to_dict(record: LoggedRequest, golden: Optional[Frame] = None) -> dict:
    doc = {
        "id": record.id,
        "utterance": record.utterance,
        "predicted_frame": serialize_frame(record.predicted_frame),
        "intent_confidence": record.intent_confidence,
        "frequency": record.frequency,
        "final_dialog_act": record.final_dialog_act.value,
        "timestamp": iso_from_ts(record.timestamp),
    }
    if golden is not None:
        doc["golden_frame"] = serialize_frame(golden)
    return doc


def request_from_dict(doc: dict, where: str = "record") -> LoggedRequest:
    try:
        act = DialogAct(_require(doc, "final_dialog_act", where))
    except ValueError as err:
        raise ValidationError(f"{where}: {err}") from err
    try:
        return LoggedRequest(
            id=str(_require(doc, "id", where)),
            utterance=str(_require(doc, "utterance", where)),
            predicted_frame=_parse_frame_field(doc, "predicted_frame", where),
            intent_confidence=doc.get("intent_confidence"),
            frequency=int(_require(doc, "frequency", where)),
            final_dialog_act=act,
            timestamp=ts_from_iso(str(_require(doc, "timestamp", where))),
        )
    except (ValueError, TypeError) as err:
        if isinstance(err, ValidationError):
            raise
        raise ValidationError(f"{where}: {err}") from err


def example_to_dict(example: TrainingExample) -> dict:
    return {
        "utterance": example.utterance,
        "frame": serialize_frame(example.frame),
        "weight": example.weight,
    }


def example_from_dict(doc: dict, where: str = "example") -> TrainingExample:
    try:
        return TrainingExample(
            utterance=str(_require(doc, "utterance", where)),
            frame=_parse_frame_field(doc, "frame", where),
            weight=int(doc.get("weight", 1)),
        )
    except (ValueError, TypeError) as err:
        if isinstance(err, ValidationError):
            raise
        raise ValidationError(f"{where}: {err}") from err


def _evidence_to_dict(evidence) -> Optional[dict]:
    if evidence is None:
        return None
    if isinstance(evidence, RuleConflictEvidence):
        return {
            "kind": "rule_conflict",
            "rule_id": evidence.rule_id,
            "rule_frame": evidence.rule_frame,
        }
    if isinstance(evidence, MislabelEvidence):
        return {
            "kind": "mislabel",
            "confidence": evidence.confidence,
            "conflicting": [example_to_dict(e) for e in evidence.conflicting],
        }
    if isinstance(evidence, TrainingGapEvidence):
        return {
            "kind": "training_gap",
            "normalized_utterance": evidence.normalized_utterance,
            "training_matches": evidence.training_matches,
        }
    raise TypeError(f"unknown evidence type {type(evidence)!r}")


def _evidence_from_dict(doc: Optional[dict], where: str):
    if doc is None:
        return None
    kind = doc.get("kind")
    if kind == "rule_conflict":
        return RuleConflictEvidence(rule_id=doc["rule_id"], rule_frame=doc["rule_frame"])
    if kind == "mislabel":
        return MislabelEvidence(
            conflicting=tuple(example_from_dict(e, where) for e in doc.get("conflicting", [])),
            confidence=doc["confidence"],
        )
    if kind == "training_gap":
        return TrainingGapEvidence(
            normalized_utterance=doc["normalized_utterance"],
            training_matches=doc.get("training_matches", 0),
        )
    raise ValidationError(f"{where}: unknown evidence kind {kind!r}")


def attribution_to_dict(attribution: Optional[ErrorAttribution]) -> Optional[dict]:
    if attribution is None:
        return None
    return {
        "category": attribution.category.value,
        "evidence": _evidence_to_dict(attribution.evidence),
    }


def attribution_from_dict(doc: Optional[dict], where: str = "attribution"):
    if doc is None:
        return None
    try:
        category = AttributionCategory(doc["category"])
    except (KeyError, ValueError) as err:
        raise ValidationError(f"{where}: {err}") from err
    return ErrorAttribution(category, _evidence_from_dict(doc.get("evidence"), where))


def bug_to_dict(bug: Bug) -> dict:
    return {
        "id": bug.id,
        "utterance": bug.utterance,
        "predicted_frame": serialize_frame(bug.predicted_frame),
        "uncertainty": bug.uncertainty,
        "frequency": bug.frequency,
        "golden_frame": serialize_frame(bug.golden_frame) if bug.golden_frame else None,
        "attribution": attribution_to_dict(bug.attribution),
        "proposals": list(bug.proposals),
        "status": bug.status.value,
        "history": [
            {"timestamp": iso_from_ts(h.timestamp), "status": h.status.value, "actor": h.actor}
            for h in bug.history
        ],
    }


def bug_from_dict(doc: dict, where: str = "bug") -> Bug:
    golden = doc.get("golden_frame")
    try:
        history = [
            HistoryEntry(
                timestamp=ts_from_iso(h["timestamp"]),
                status=BugStatus(h["status"]),
                actor=h["actor"],
            )
            for h in doc.get("history", [])
        ]
        return Bug(
            id=str(_require(doc, "id", where)),
            utterance=str(_require(doc, "utterance", where)),
            predicted_frame=_parse_frame_field(doc, "predicted_frame", where),
            uncertainty=float(_require(doc, "uncertainty", where)),
            frequency=int(_require(doc, "frequency", where)),
            golden_frame=parse_frame(golden) if golden else None,
            attribution=attribution_from_dict(doc.get("attribution"), where),
            proposals=list(doc.get("proposals", [])),
            status=BugStatus(_require(doc, "status", where)),
            history=history,
        )
    except (KeyError, ValueError, TypeError) as err:
        if isinstance(err, ValidationError):
            raise
        raise ValidationError(f"{where}: {err}") from err


def proposal_to_dict(proposal: AugmentationProposal) -> dict:
    return {
        "id": proposal.id,
        "source_bug_id": proposal.source_bug_id,
        "strategy": proposal.strategy.value,
        "review_status": proposal.review_status.value,
        "examples": [example_to_dict(e) for e in proposal.examples],
    }


def proposal_from_dict(doc: dict, where: str = "proposal") -> AugmentationProposal:
    try:
        return AugmentationProposal(
            id=str(_require(doc, "id", where)),
            source_bug_id=str(_require(doc, "source_bug_id", where)),
            strategy=ProposalStrategy(_require(doc, "strategy", where)),
            examples=tuple(
                example_from_dict(e, where) for e in doc.get("examples", [])
            ),
            review_status=ReviewStatus(doc.get("review_status", "pending")),
        )
    except (ValueError, TypeError) as err:
        if isinstance(err, ValidationError):
            raise
        raise ValidationError(f"{where}: {err}") from err


def rule_to_dict(rule: Rule) -> dict:
    return {"id": rule.id, "utterance": rule.utterance, "frame": serialize_frame(rule.frame)}


def rule_from_dict(doc: dict, where: str = "rule") -> Rule:
    return Rule(
        id=str(_require(doc, "id", where)),
        utterance=str(_require(doc, "utterance", where)),
        frame=_parse_frame_field(doc, "frame", where),
    )


# ---------------------------------------------------------------------------
# file primitives


def _write_atomic(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as handle:
        handle.write(text)
        handle.flush()
        os.fsync(handle.fileno())
    os.replace(tmp, path)


def write_jsonl(path: Union[str, Path], docs: Iterable[dict]) -> None:
    path = Path(path)
    lines = [json.dumps(doc, sort_keys=True, ensure_ascii=False) for doc in docs]
    _write_atomic(path, "".join(line + "\n" for line in lines))


def read_jsonl(path: Union[str, Path]) -> list[tuple[int, dict]]:
    out = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                out.append((lineno, json.loads(line)))
            except json.JSONDecodeError as err:
                raise ValidationError(f"{path}:{lineno}: not valid JSON: {err}") from err
    return out


# ---------------------------------------------------------------------------
# standalone ingestion and emission (CLI file mode)


def ingest_pool(
    path: Union[str, Path],
    ontology: Optional[Ontology] = None,
    skip_bad_lines: bool = False,
) -> list[LoggedRequest]:
    """Read a pool JSONL file.  By default the first bad line aborts the load;
    with skip_bad_lines the bad lines are dropped instead."""
    records = []
    for lineno, doc in read_jsonl(path):
        where = f"{path}:{lineno}"
        try:
            record = request_from_dict(doc, where)
            if ontology is not None:
                ontology.validate_frame(record.predicted_frame)
        except (ValidationError, FrameError) as err:
            if skip_bad_lines:
                continue
            if isinstance(err, ValidationError):
                raise
            raise ValidationError(f"{where}: {err}") from err
        records.append(record)
    return records


def ingest_graded_pool(
    path: Union[str, Path],
    ontology: Optional[Ontology] = None,
) -> list[tuple[LoggedRequest, Frame]]:
    """Pool records paired with their golden frames (required on every line)."""
    pairs = []
    for lineno, doc in read_jsonl(path):
        where = f"{path}:{lineno}"
        record = request_from_dict(doc, where)
        golden = _parse_frame_field(doc, "golden_frame", where)
        if tuple(record.utterance.split()) != golden.tokens():
            raise ValidationError(f"{where}: golden frame does not annotate the utterance")
        if ontology is not None:
            ontology.validate_frame(record.predicted_frame)
            ontology.validate_frame(golden)
        pairs.append((record, golden))
    return pairs


def write_pool(
    path: Union[str, Path],
    records: Iterable[LoggedRequest],
    goldens: Optional[dict[str, Frame]] = None,
) -> None:
    docs = []
    for record in records:
        golden = goldens.get(record.id) if goldens else None
        docs.append(request_to_dict(record, golden))
    write_jsonl(path, docs)


def ingest_dataset(
    path: Union[str, Path],
    ontology: Optional[Ontology] = None,
    skip_bad_lines: bool = False,
) -> list[TrainingExample]:
    examples = []
    for lineno, doc in read_jsonl(path):
        where = f"{path}:{lineno}"
        try:
            example = example_from_dict(doc, where)
            if ontology is not None:
                ontology.validate_frame(example.frame)
        except (ValidationError, FrameError) as err:
            if skip_bad_lines:
                continue
            if isinstance(err, ValidationError):
                raise
            raise ValidationError(f"{where}: {err}") from err
        examples.append(example)
    return examples


def write_dataset(path: Union[str, Path], examples: Iterable[TrainingExample]) -> None:
    write_jsonl(path, (example_to_dict(e) for e in examples))


def ingest_bugs(path: Union[str, Path]) -> list[Bug]:
    return [bug_from_dict(doc, f"{path}:{lineno}") for lineno, doc in read_jsonl(path)]


def write_bugs(path: Union[str, Path], bugs: Iterable[Bug]) -> None:
    write_jsonl(path, (bug_to_dict(b) for b in bugs))


def ingest_rules(
    path: Union[str, Path],
    normalization: Normalization = Normalization.FOLD_CASE_AND_WHITESPACE,
) -> RuleStore:
    rules = RuleStore(normalization=normalization)
    for lineno, doc in read_jsonl(path):
        rules.add(rule_from_dict(doc, f"{path}:{lineno}"))
    return rules


def write_rules(path: Union[str, Path], rules: RuleStore) -> None:
    write_jsonl(path, (rule_to_dict(r) for r in rules))


def ingest_proposals(path: Union[str, Path]) -> list[AugmentationProposal]:
    return [proposal_from_dict(doc, f"{path}:{lineno}") for lineno, doc in read_jsonl(path)]


def write_proposals(path: Union[str, Path], proposals: Iterable[AugmentationProposal]) -> None:
    write_jsonl(path, (proposal_to_dict(p) for p in proposals))


# ---------------------------------------------------------------------------
# the store proper


class Store:
    """Owns one store directory.  All state lives in memory after open();
    every mutation immediately rewrites the affected file atomically."""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.ontology: Optional[Ontology] = None
        self.bugs: dict[str, Bug] = {}
        self.proposal_map: dict[str, AugmentationProposal] = {}
        self.rules: RuleStore = RuleStore()
        self.gazetteers: Gazetteer = Gazetteer()
        self._next_bug_id = 1

    # -- paths

    @property
    def ledger_path(self) -> Path:
        return self.root / "bugs" / "ledger.jsonl"

    @property
    def rules_path(self) -> Path:
        return self.root / "rules" / "rules.jsonl"

    @property
    def proposals_path(self) -> Path:
        return self.root / "proposals" / "proposals.jsonl"

    @property
    def index_path(self) -> Path:
        return self.root / "index.json"

    @property
    def ontology_path(self) -> Path:
        return self.root / "ontology.json"

    @property
    def model_path(self) -> Path:
        return self.root / "model.json"

    # -- lifecycle

    @classmethod
    def initialize(cls, root: Union[str, Path], ontology: Ontology) -> "Store":
        store = cls(root)
        for sub in ("pool", "train", "bugs", "rules", "proposals", "gazetteers"):
            (store.root / sub).mkdir(parents=True, exist_ok=True)
        save_ontology(ontology, store.ontology_path)
        store.ontology = ontology
        store._flush_index()
        store._flush_ledger()
        store._flush_rules()
        store._flush_proposals()
        return store

    @classmethod
    def open(cls, root: Union[str, Path]) -> "Store":
        store = cls(root)
        if not store.root.is_dir():
            raise ValidationError(f"store root {store.root} does not exist")
        if store.ontology_path.exists():
            store.ontology = load_ontology(store.ontology_path)
        if store.index_path.exists():
            with open(store.index_path, "r", encoding="utf-8") as handle:
                store._next_bug_id = int(json.load(handle).get("next_bug_id", 1))
        if store.ledger_path.exists():
            for bug in ingest_bugs(store.ledger_path):
                store.bugs[bug.id] = bug
        if store.rules_path.exists():
            store.rules = ingest_rules(store.rules_path)
        if store.proposals_path.exists():
            for proposal in ingest_proposals(store.proposals_path):
                store.proposal_map[proposal.id] = proposal
        gz_dir = store.root / "gazetteers"
        if gz_dir.is_dir():
            for path in sorted(gz_dir.glob("*.json")):
                with open(path, "r", encoding="utf-8") as handle:
                    store.gazetteers.merge(gazetteer_from_dict(json.load(handle)))
        return store

    # -- flushing

    def _flush_index(self) -> None:
        _write_atomic(
            self.index_path,
            json.dumps({"version": 1, "next_bug_id": self._next_bug_id}, sort_keys=True) + "\n",
        )

    def _flush_ledger(self) -> None:
        self.ledger_path.parent.mkdir(parents=True, exist_ok=True)
        write_bugs(self.ledger_path, self.bugs.values())

    def _flush_rules(self) -> None:
        self.rules_path.parent.mkdir(parents=True, exist_ok=True)
        write_rules(self.rules_path, self.rules)

    def _flush_proposals(self) -> None:
        self.proposals_path.parent.mkdir(parents=True, exist_ok=True)
        write_proposals(self.proposals_path, self.proposal_map.values())

    def save_gazetteers(self, name: str = "gazetteers") -> None:
        gz_dir = self.root / "gazetteers"
        gz_dir.mkdir(parents=True, exist_ok=True)
        _write_atomic(
            gz_dir / f"{name}.json",
            json.dumps(self.gazetteers.to_dict(), indent=2, sort_keys=True) + "\n",
        )

    # -- training data

    def training_files(self) -> list[Path]:
        train_dir = self.root / "train"
        return sorted(train_dir.glob("*.jsonl")) if train_dir.is_dir() else []

    def load_training(self) -> list[TrainingExample]:
        examples: list[TrainingExample] = []
        for path in self.training_files():
            examples.extend(ingest_dataset(path, self.ontology))
        return examples

    def write_training_file(self, name: str, examples: Iterable[TrainingExample]) -> None:
        train_dir = self.root / "train"
        train_dir.mkdir(parents=True, exist_ok=True)
        write_dataset(train_dir / f"{name}.jsonl", examples)

    def append_training(
        self, examples: Iterable[TrainingExample], name: str = "accepted"
    ) -> int:
        """Append examples to train/<name>.jsonl; returns new total size."""
        path = self.root / "train" / f"{name}.jsonl"
        existing = ingest_dataset(path, self.ontology) if path.exists() else []
        existing.extend(examples)
        self.write_training_file(name, existing)
        return len(self.load_training())

    # -- pool files

    def pool_files(self) -> list[Path]:
        pool_dir = self.root / "pool"
        return sorted(pool_dir.glob("*.jsonl")) if pool_dir.is_dir() else []

    def load_pool(self) -> list[LoggedRequest]:
        records: list[LoggedRequest] = []
        for path in self.pool_files():
            records.extend(ingest_pool(path, self.ontology))
        return records

    def write_pool_file(
        self,
        name: str,
        records: Iterable[LoggedRequest],
        goldens: Optional[dict[str, Frame]] = None,
    ) -> None:
        pool_dir = self.root / "pool"
        pool_dir.mkdir(parents=True, exist_ok=True)
        write_pool(pool_dir / f"{name}.jsonl", records, goldens)

    # -- bugs

    def create_bug(
        self,
        utterance: str,
        predicted_frame: Frame,
        uncertainty: float,
        frequency: int,
        actor: str = "detector",
        timestamp: Optional[float] = None,
    ) -> Bug:
        bug = new_bug(
            f"bug-{self._next_bug_id:06d}",
            utterance,
            predicted_frame,
            uncertainty,
            frequency,
            actor=actor,
            timestamp=timestamp,
        )
        self._next_bug_id += 1
        self.bugs[bug.id] = bug
        self._flush_index()
        self._flush_ledger()
        return bug

    def get_bug(self, bug_id: str) -> Bug:
        try:
            return self.bugs[bug_id]
        except KeyError:
            raise KeyError(f"no bug with id {bug_id}") from None

    def find_bug_by_utterance(self, utterance: str) -> Optional[Bug]:
        key = normalize(utterance)
        for bug in self.bugs.values():
            if normalize(bug.utterance) == key:
                return bug
        return None

    def transition(
        self,
        bug_id: str,
        new_status: BugStatus,
        actor: str,
        timestamp: Optional[float] = None,
    ) -> Bug:
        bug = transition_bug(self.get_bug(bug_id), new_status, actor, timestamp)
        self._flush_ledger()
        return bug

    def grade_bug(
        self, bug_id: str, golden: Frame, actor: str = "grader"
    ) -> Bug:
        bug = self.get_bug(bug_id)
        if tuple(bug.utterance.split()) != golden.tokens():
            raise ValidationError(
                f"golden frame does not annotate the utterance of bug {bug_id}"
            )
        if self.ontology is not None:
            self.ontology.validate_frame(golden)
        bug.golden_frame = golden
        return self.transition(bug_id, BugStatus.GRADED, actor)

    def attribute_bug(
        self, bug_id: str, attribution: ErrorAttribution, actor: str = "attributor"
    ) -> Bug:
        bug = self.get_bug(bug_id)
        bug.attribution = attribution
        return self.transition(bug_id, BugStatus.ATTRIBUTED, actor)

    # -- proposals

    def add_proposal(
        self, proposal: AugmentationProposal, actor: str = "fixer"
    ) -> AugmentationProposal:
        bug = self.get_bug(proposal.source_bug_id)
        self.proposal_map[proposal.id] = proposal
        if proposal.id not in bug.proposals:
            bug.proposals.append(proposal.id)
        if bug.status is BugStatus.ATTRIBUTED:
            transition_bug(bug, BugStatus.FIX_PROPOSED, actor)
        self._flush_proposals()
        self._flush_ledger()
        return proposal

    def get_proposal(self, proposal_id: str) -> AugmentationProposal:
        try:
            return self.proposal_map[proposal_id]
        except KeyError:
            raise KeyError(f"no proposal with id {proposal_id}") from None

    def review_proposal(
        self, proposal_id: str, accept: bool, actor: str = "reviewer"
    ) -> AugmentationProposal:
        """Accept moves the examples into training and the bug to FixApplied;
        reject just archives the proposal.  Only pending proposals review."""
        proposal = self.get_proposal(proposal_id)
        if proposal.review_status is not ReviewStatus.PENDING:
            raise ReviewConflictError(
                f"proposal {proposal_id} is already {proposal.review_status.value}"
            )
        if accept:
            proposal.review_status = ReviewStatus.ACCEPTED
            self.append_training(proposal.examples)
            bug = self.bugs.get(proposal.source_bug_id)
            if bug is not None and bug.status is BugStatus.FIX_PROPOSED:
                transition_bug(bug, BugStatus.FIX_APPLIED, actor)
        else:
            proposal.review_status = ReviewStatus.REJECTED
        self._flush_proposals()
        self._flush_ledger()
        return proposal

    # -- rules

    def add_rule(self, rule: Rule, replace: bool = False) -> None:
        self.rules.add(rule, replace=replace)
        self._flush_rules()

    # -- verification

    def verify_sweep(
        self, model: refmodel.ReferenceModel, actor: str = "verifier"
    ) -> tuple[list[str], list[str]]:
        """Re-predict every FixApplied bug; Match means Verified, anything
        else means the bug recurred."""
        verified: list[str] = []
        recurred: list[str] = []
        for bug in self.bugs.values():
            if bug.status is not BugStatus.FIX_APPLIED or bug.golden_frame is None:
                continue
            predicted, _confidence = refmodel.predict(model, bug.utterance)
            if is_bug(bug.golden_frame, predicted, self.ontology):
                transition_bug(bug, BugStatus.RECURRED, actor)
                recurred.append(bug.id)
            else:
                transition_bug(bug, BugStatus.VERIFIED, actor)
                verified.append(bug.id)
        if verified or recurred:
            self._flush_ledger()
        return verified, recurred

    def check_recurrences(
        self, pool: Iterable[LoggedRequest], actor: str = "detector"
    ) -> list[str]:
        """Flip Verified bugs back to Recurred when fresh traffic shows the
        same normalized utterance parsed wrong again."""
        by_text: dict[str, Bug] = {}
        for bug in self.bugs.values():
            if bug.status is BugStatus.VERIFIED and bug.golden_frame is not None:
                by_text[normalize(bug.utterance)] = bug
        recurred: list[str] = []
        for record in pool:
            bug = by_text.get(normalize(record.utterance))
            if bug is None or bug.status is not BugStatus.VERIFIED:
                continue
            try:
                wrong = is_bug(bug.golden_frame, record.predicted_frame, self.ontology)
            except FrameError:
                continue
            if wrong:
                transition_bug(bug, BugStatus.RECURRED, actor)
                recurred.append(bug.id)
        if recurred:
            self._flush_ledger()
        return recurred

    # -- reporting

    def ledger_report(
        self,
        window_start: Optional[float] = None,
        window_end: Optional[float] = None,
    ) -> LedgerSnapshot:
        counts = {status.value: 0 for status in BugStatus}
        for bug in self.bugs.values():
            counts[bug.status.value] += 1

        def in_window(ts: float) -> bool:
            if window_start is not None and ts < window_start:
                return False
            if window_end is not None and ts > window_end:
                return False
            return True

        fixes = 0
        recurrences: list[str] = []
        for bug in self.bugs.values():
            for entry in bug.history:
                if not in_window(entry.timestamp):
                    continue
                if entry.status is BugStatus.VERIFIED:
                    fixes += 1
                elif entry.status is BugStatus.RECURRED and bug.id not in recurrences:
                    recurrences.append(bug.id)
        return LedgerSnapshot(
            counts=counts,
            total=len(self.bugs),
            fixes=fixes,
            recurrences=tuple(sorted(recurrences)),
            window_start=window_start,
            window_end=window_end,
        )

    # -- model

    def save_model(self, model: refmodel.ReferenceModel) -> None:
        refmodel.dump_model(model, self.model_path)

    def load_model(self) -> Optional[refmodel.ReferenceModel]:
        if not self.model_path.exists():
            return None
        return refmodel.load_model(self.model_path)

    def retrain(self) -> refmodel.ReferenceModel:
        """Train on everything under train/ and persist the model."""
        if self.ontology is None:
            raise ValidationError(f"store {self.root} has no ontology.json")
        dataset = self.load_training()
        model = refmodel.train(dataset, self.gazetteers, self.ontology)
        self.save_model(model)
        return model
