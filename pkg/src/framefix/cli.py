"""Command line workflows over the quality loop.

File based subcommands (detect, attribute, fix, apply, retrain) read and
write JSONL artifacts so each stage can run standalone or in a shell
pipeline.  The experiment subcommands print deterministic reports for a
given --seed.  init seeds a demo store on disk and serve exposes it over
HTTP for review tooling.

Exit codes: 0 on success, 1 on an operational error (bad file, bad frame,
illegal transition), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import json
import random
import shutil
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import store as storage
from .attribution import (
    AttributionCategory,
    AttributionConfig,
    CORRECTION_ACTIONS,
    attribute,
    build_training_index,
)
from .correction import (
    Gazetteer,
    ReviewStatus,
    RuleStore,
    TransformOp,
    TransformScope,
    TransformSpec,
    apply_transform,
    exact_match_proposal,
    gazetteer_from_dict,
    generate_rule,
    templated_proposal,
)
from .detection import (
    RankingKey,
    SamplingConfig,
    SamplingStrategy,
    sample_candidates,
    uncertainty_score,
)
from .experiments import (
    AugmentExperimentConfig,
    SamplingExperimentConfig,
    render_augment_report,
    render_sampling_report,
    run_augment_experiment,
    run_sampling_experiment,
)
from .frames import Frame, FrameError, leaf_slots, parse_frame
from .ontology import Ontology, load_ontology
from .refmodel import dump_model, train
from .synth import (
    build_world,
    generate_pool,
    generate_rules,
    generate_training,
)


def _load_gazetteers(path: Optional[str]) -> Gazetteer:
    if path is None:
        return Gazetteer()
    with open(path, "r", encoding="utf-8") as handle:
        return gazetteer_from_dict(json.load(handle))


def _load_ontology(path: Optional[str]) -> Optional[Ontology]:
    return load_ontology(path) if path else None


def _emit(text: str, out: Optional[str]) -> None:
    sys.stdout.write(text)
    if out:
        Path(out).write_text(text, encoding="utf-8")


def cmd_detect(args: argparse.Namespace) -> int:
    records = storage.ingest_pool(args.pool)
    if not records:
        raise storage.ValidationError(f"{args.pool} holds no records")
    config = SamplingConfig(
        k=min(args.k, len(records)),
        pool_size=len(records),
        strategy=SamplingStrategy(args.strategy),
        ranking=RankingKey(args.ranking),
        seed=args.seed,
    )
    chosen = sample_candidates(records, config)
    bugs = [
        storage.new_bug(
            f"bug-{i + 1:06d}",
            record.utterance,
            record.predicted_frame,
            uncertainty_score(record),
            record.frequency,
            timestamp=record.timestamp,
        )
        for i, record in enumerate(chosen)
    ]
    storage.write_bugs(args.out, bugs)
    print(
        f"selected {len(bugs)} review candidates from {len(records)} records "
        f"({args.strategy}, ranked by {args.ranking}) -> {args.out}"
    )
    return 0


def cmd_attribute(args: argparse.Namespace) -> int:
    ontology = _load_ontology(args.ontology)
    bugs = storage.ingest_bugs(args.bugs)
    config = AttributionConfig(mislabel_threshold=args.mislabel_threshold)
    index = build_training_index(storage.ingest_dataset(args.train, ontology), config)
    rules = storage.ingest_rules(args.rules) if args.rules else RuleStore()

    counts = {category: 0 for category in AttributionCategory}
    skipped = 0
    for bug in bugs:
        if bug.golden_frame is None:
            skipped += 1
            continue
        if bug.status is storage.BugStatus.DETECTED:
            storage.transition_bug(bug, storage.BugStatus.GRADED, actor="cli")
        bug.attribution = attribute(bug, index, rules, config)
        if bug.status is storage.BugStatus.GRADED:
            storage.transition_bug(bug, storage.BugStatus.ATTRIBUTED, actor="cli")
        counts[bug.attribution.category] += 1
    storage.write_bugs(args.out, bugs)

    print(f"attributed {sum(counts.values())} bugs ({skipped} without goldens) -> {args.out}")
    for category in AttributionCategory:
        print(f"  {category.value}: {counts[category]} ({CORRECTION_ACTIONS[category]})")
    return 0


_FIX_TARGETS = {
    "exact": (AttributionCategory.MISLABELED,),
    "templated": (AttributionCategory.LOW_TRAINING_DATA,),
    "rule": (AttributionCategory.UNKNOWN, AttributionCategory.RULE_MISMATCH),
}


def cmd_fix(args: argparse.Namespace) -> int:
    bugs = storage.ingest_bugs(args.bugs)
    targets = _FIX_TARGETS[args.strategy]
    if args.strategy == "templated":
        if not args.ontology:
            raise storage.ValidationError("--strategy templated requires --ontology")
        if not args.gazetteers:
            raise storage.ValidationError("--strategy templated requires --gazetteers")
    ontology = _load_ontology(args.ontology)
    gazetteers = _load_gazetteers(args.gazetteers)

    proposals = []
    rules_out = RuleStore()
    matched = produced = 0
    for i, bug in enumerate(bugs):
        if bug.golden_frame is None or bug.attribution is None:
            continue
        if bug.attribution.category not in targets:
            continue
        matched += 1
        if args.strategy == "rule":
            rules_out.add(generate_rule(bug.utterance, bug.golden_frame), replace=True)
            produced += 1
            continue
        if args.strategy == "exact":
            proposal = exact_match_proposal(bug)
        else:
            proposal = templated_proposal(
                bug, ontology, gazetteers, seed=args.seed + i
            )
        if proposal is None:
            continue
        if args.auto_accept:
            proposal.review_status = ReviewStatus.ACCEPTED
        proposals.append(proposal)
        produced += 1
        bug.proposals.append(proposal.id)
        if bug.status is storage.BugStatus.ATTRIBUTED:
            storage.transition_bug(bug, storage.BugStatus.FIX_PROPOSED, actor="cli")

    if args.strategy == "rule":
        storage.write_rules(args.out, rules_out)
        print(f"generated {produced} rules for {matched} matching bugs -> {args.out}")
    else:
        storage.write_proposals(args.out, proposals)
        state = "accepted" if args.auto_accept else "pending"
        print(
            f"generated {produced} {state} proposals for {matched} matching bugs "
            f"-> {args.out}"
        )
    if args.bugs_out:
        storage.write_bugs(args.bugs_out, bugs)
        print(f"updated bug states -> {args.bugs_out}")
    return 0


def _load_transform(value: str) -> TransformSpec:
    if value.lstrip().startswith("{"):
        doc = json.loads(value)
    else:
        with open(value, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    try:
        return TransformSpec(
            op=TransformOp(doc["op"]),
            to_label=doc["to_label"],
            from_label=doc.get("from_label"),
            scope=TransformScope(**doc.get("scope", {})),
        )
    except (KeyError, TypeError) as exc:
        raise storage.ValidationError(f"bad transform spec: {exc}") from exc


def cmd_apply(args: argparse.Namespace) -> int:
    if not args.proposals and not args.transform:
        raise storage.ValidationError("apply needs --proposals and/or --transform")
    ontology = _load_ontology(args.ontology)
    dataset = storage.ingest_dataset(args.train, ontology)
    added = 0
    if args.proposals:
        for proposal in storage.ingest_proposals(args.proposals):
            if proposal.review_status is ReviewStatus.ACCEPTED:
                dataset.extend(proposal.examples)
                added += len(proposal.examples)
    changed = 0
    if args.transform:
        spec = _load_transform(args.transform)
        dataset, changed = apply_transform(dataset, spec, ontology)
    storage.write_dataset(args.out, dataset)
    print(
        f"wrote {len(dataset)} examples (+{added} from accepted proposals, "
        f"{changed} transformed) -> {args.out}"
    )
    return 0


def cmd_retrain(args: argparse.Namespace) -> int:
    ontology = load_ontology(args.ontology)
    dataset = storage.ingest_dataset(args.train, ontology)
    model = train(dataset, _load_gazetteers(args.gazetteers), ontology)
    dump_model(model, args.out)
    print(
        f"trained on {len(dataset)} examples: {len(model.exact_table)} exact "
        f"entries, {len(model.bank)} patterns -> {args.out}"
    )
    return 0


def cmd_experiment_sampling(args: argparse.Namespace) -> int:
    config = SamplingExperimentConfig(
        pool_size=args.pool_size,
        k=args.k,
        seeds=tuple(args.seed + i for i in range(args.runs)),
        world_seed=args.seed,
    )
    _emit(render_sampling_report(run_sampling_experiment(config)), args.out)
    return 0


def cmd_experiment_augment(args: argparse.Namespace) -> int:
    config = AugmentExperimentConfig(seed=args.seed)
    _emit(render_augment_report(run_augment_experiment(config)), args.out)
    return 0


# demo fixture: golden keeps "holiday cooking" as a playlist name, the
# prediction drops the slot and leaves the tokens loose
_DEMO_UTTERANCE = "Play my holiday cooking playlist"
_DEMO_GOLDEN = (
    "[IN:PLAY_MUSIC Play my [SL:PLAYLIST_NAME holiday cooking ] "
    "[SL:MUSIC_TYPE playlist ] ]"
)
_DEMO_PREDICTED = "[IN:PLAY_MUSIC Play my holiday cooking [SL:MUSIC_TYPE playlist ] ]"


def _slots_covered(frame: Frame, gazetteers: Gazetteer) -> bool:
    for _path, slot, _span in leaf_slots(frame):
        if gazetteers.has(slot.label) and tuple(slot.children) not in (
            gazetteers.values_for(slot.label)
        ):
            return False
    return True


def cmd_init(args: argparse.Namespace) -> int:
    root = Path(args.root)
    if (root / "index.json").exists():
        if not args.force:
            raise storage.ValidationError(
                f"{root} already holds a store (pass --force to reseed)"
            )
        shutil.rmtree(root)
    rng = random.Random(args.seed)
    world = build_world()
    store = storage.Store.initialize(root, world.ontology)
    store.gazetteers.merge(world.gazetteers)
    store.save_gazetteers()

    training = generate_training(world, rng)
    store.write_training_file("base", training.examples)
    rules = generate_rules(world, training, rng)
    for rule in rules.store:
        store.add_rule(rule)
    pool = generate_pool(world, training, rules, rng, size=args.pool_size)
    store.write_pool_file("demo", pool.records, pool.goldens)
    store.retrain()

    chosen = sample_candidates(
        pool.records,
        SamplingConfig(
            k=min(args.bugs, len(pool.records)),
            pool_size=len(pool.records),
            strategy=SamplingStrategy.LEAST_CONFIDENCE,
            seed=args.seed,
        ),
    )
    index = build_training_index(store.load_training())
    created = []
    for record in chosen:
        bug = store.create_bug(
            record.utterance,
            record.predicted_frame,
            uncertainty_score(record),
            record.frequency,
            timestamp=record.timestamp,
        )
        created.append((bug, record))

    # leave the last two raw so the queue shows every stage
    graded = created[: max(0, len(created) - 2)]
    for bug, record in graded:
        store.grade_bug(bug.id, pool.goldens[record.id])
        store.attribute_bug(bug.id, attribute(bug, index, store.rules))

    # the last graded bug stays attributed with no proposal yet
    for i, (bug, _record) in enumerate(graded[:-1]):
        category = bug.attribution.category
        proposal = None
        if category is AttributionCategory.MISLABELED:
            proposal = exact_match_proposal(bug)
        elif category is AttributionCategory.LOW_TRAINING_DATA:
            proposal = templated_proposal(
                bug, world.ontology, store.gazetteers, seed=args.seed + i
            )
        if proposal is not None:
            store.add_proposal(proposal)

    # walk one covered and one uncovered bug through accept + verify so the
    # ledger shows fix_applied, verified, and recurred states
    verified_bug = recurred_bug = None
    for bug, _record in graded:
        if not bug.proposals or bug.golden_frame is None:
            continue
        covered = _slots_covered(bug.golden_frame, store.gazetteers)
        if covered and verified_bug is None:
            verified_bug = bug
        elif not covered and recurred_bug is None:
            recurred_bug = bug
    for bug in (verified_bug, recurred_bug):
        if bug is not None:
            store.review_proposal(bug.proposals[0], accept=True)
    store.verify_sweep(store.retrain())

    # the demo diff fixture: graded but not yet attributed
    fixture = store.create_bug(
        _DEMO_UTTERANCE,
        parse_frame(_DEMO_PREDICTED),
        uncertainty=0.35,
        frequency=9,
    )
    store.grade_bug(fixture.id, parse_frame(_DEMO_GOLDEN))

    report = store.ledger_report()
    pending = sum(
        1
        for proposal in store.proposal_map.values()
        if proposal.review_status is ReviewStatus.PENDING
    )
    print(f"seeded store at {root}")
    print(
        f"  {len(store.bugs)} bugs: "
        + ", ".join(f"{status}={count}" for status, count in report.counts.items() if count)
    )
    print(f"  {pending} pending proposals, {len(store.rules)} rules")
    print(f"  training examples: {len(store.load_training())}, model: {store.model_path}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service.app import create_app

    app = create_app(args.root)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="framefix",
        description="Detect, root-cause, and fix bugs in a task-oriented semantic parser.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="pick review candidates from a traffic pool")
    p.add_argument("--pool", required=True, help="pool JSONL of logged requests")
    p.add_argument("--k", type=int, default=100, help="review budget")
    p.add_argument(
        "--strategy",
        choices=[s.value for s in SamplingStrategy],
        default=SamplingStrategy.LEAST_CONFIDENCE.value,
    )
    p.add_argument(
        "--ranking",
        choices=[r.value for r in RankingKey],
        default=RankingKey.UNCERTAINTY.value,
    )
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="bug JSONL to write")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("attribute", help="assign root causes to graded bugs")
    p.add_argument("--bugs", required=True, help="bug JSONL (graded bugs carry goldens)")
    p.add_argument("--train", required=True, help="training JSONL")
    p.add_argument("--rules", help="rules JSONL")
    p.add_argument("--ontology", help="ontology JSON")
    p.add_argument(
        "--lambda",
        dest="mislabel_threshold",
        type=float,
        default=0.9,
        help="confidence threshold for the mislabel check",
    )
    p.add_argument("--out", required=True, help="updated bug JSONL to write")
    p.set_defaults(func=cmd_attribute)

    p = sub.add_parser("fix", help="propose corrections for attributed bugs")
    p.add_argument("--bugs", required=True, help="attributed bug JSONL")
    p.add_argument("--strategy", choices=sorted(_FIX_TARGETS), required=True)
    p.add_argument("--gazetteers", help="gazetteer JSON (templated strategy)")
    p.add_argument("--ontology", help="ontology JSON (templated strategy)")
    p.add_argument("--auto-accept", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="proposal or rule JSONL to write")
    p.add_argument("--bugs-out", help="also write updated bug states here")
    p.set_defaults(func=cmd_fix)

    p = sub.add_parser("apply", help="merge accepted proposals and apply transforms")
    p.add_argument("--train", required=True, help="training JSONL")
    p.add_argument("--proposals", help="proposal JSONL; accepted ones merge in")
    p.add_argument("--transform", help="transform spec: inline JSON or a path")
    p.add_argument("--ontology", help="ontology JSON for validation")
    p.add_argument("--out", required=True, help="training JSONL to write")
    p.set_defaults(func=cmd_apply)

    p = sub.add_parser("retrain", help="train the reference parser from files")
    p.add_argument("--train", required=True, help="training JSONL")
    p.add_argument("--gazetteers", help="gazetteer JSON")
    p.add_argument("--ontology", required=True, help="ontology JSON")
    p.add_argument("--out", required=True, help="model JSON to write")
    p.set_defaults(func=cmd_retrain)

    p = sub.add_parser(
        "experiment-sampling",
        help="least confidence vs random review on synthetic traffic",
    )
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--pool-size", type=int, default=10_000)
    p.add_argument("--k", type=int, default=100)
    p.add_argument("--runs", type=int, default=5, help="pools per report")
    p.add_argument("--out", help="also write the report here")
    p.set_defaults(func=cmd_experiment_sampling)

    p = sub.add_parser(
        "experiment-augment",
        help="correction strategies vs seeded regressions",
    )
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="also write the report here")
    p.set_defaults(func=cmd_experiment_augment)

    p = sub.add_parser("init", help="seed a demo store for the review service")
    p.add_argument("--root", required=True, help="store directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--pool-size", type=int, default=400)
    p.add_argument("--bugs", type=int, default=12, help="review candidates to file")
    p.add_argument("--force", action="store_true", help="reseed an existing store")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("serve", help="serve the review API over HTTP")
    p.add_argument("--root", required=True, help="store directory")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError, RuntimeError) as exc:
        if isinstance(exc, KeyError) and exc.args:
            message = exc.args[0]  # str(KeyError) wraps the message in quotes
        else:
            message = str(exc)
        print(f"error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
