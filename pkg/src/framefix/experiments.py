"""Desk scale experiments over the synthetic assistant world.

Two studies, both deterministic given their config:

1. sampling: does least confidence review surface more task failures and
   more real parse bugs than uniform random review at the same budget k?
2. augmentation: given 200 seeded regressions on unseen utterance shapes,
   how much does each correction strategy (exact example, templated
   expansion) recover, and does the base model regress?

Reports carry no wall clock timestamps, so rendering the same config twice
produces byte identical text.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .attribution import build_training_index
from .correction import exact_match_proposal, templated_proposal
from .detection import (
    HistogramBin,
    SamplingConfig,
    SamplingStrategy,
    dedupe_pool,
    misclassification_split,
    sample_candidates,
    score_histogram,
    task_success_proxy,
)
from .frames import Frame, is_bug, serialize_frame
from .records import TrainingExample
from .refmodel import predict, train
from .store import new_bug
from .synth import (
    SeedCase,
    World,
    build_world,
    generate_pool,
    generate_rules,
    generate_seed_bugs,
    generate_training,
    sample_instances,
)


# ---------------------------------------------------------------------------
# sampling experiment


@dataclass(frozen=True)
class SamplingExperimentConfig:
    pool_size: int = 10_000
    k: int = 100
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    bins: int = 10
    world_seed: int = 2024

    def __post_init__(self) -> None:
        if not self.seeds:
            raise ValueError("at least one seed is required")
        if self.bins < 1:
            raise ValueError("bins must be at least 1")


@dataclass(frozen=True)
class PoolStats:
    seed: int
    records: int
    unique: int
    unique_wrong: int

    @property
    def base_error_rate(self) -> float:
        return self.unique_wrong / self.unique if self.unique else 0.0


@dataclass(frozen=True)
class ArmResult:
    seed: int
    strategy: str
    selected: int
    task_failures: int
    bugs: int


@dataclass(frozen=True)
class CalibrationReport:
    misclassified_count: int
    correct_count: int
    high_uncertainty_fraction: float
    misclassified_histogram: tuple[HistogramBin, ...]
    correct_histogram: tuple[HistogramBin, ...]


@dataclass(frozen=True)
class SamplingReport:
    config: SamplingExperimentConfig
    pools: tuple[PoolStats, ...]
    arms: tuple[ArmResult, ...]
    mean_lc_failures: float
    mean_random_failures: float
    failure_ratio: float
    mean_lc_bugs: float
    mean_random_bugs: float
    bug_ratio: float
    mean_base_error_rate: float
    mean_top_k_precision: float
    calibration: CalibrationReport


def _ratio(numerator: float, denominator: float) -> float:
    return numerator / denominator if denominator else float("inf")


def run_sampling_experiment(
    config: SamplingExperimentConfig = SamplingExperimentConfig(),
) -> SamplingReport:
    world = build_world()
    setup_rng = random.Random(f"{config.world_seed}:setup")
    training = generate_training(world, setup_rng)
    rules = generate_rules(world, training, setup_rng)

    pools: list[PoolStats] = []
    arms: list[ArmResult] = []
    precisions: list[float] = []
    calibration: CalibrationReport | None = None

    for seed in config.seeds:
        pool_rng = random.Random(f"{config.world_seed}:pool:{seed}")
        bundle = generate_pool(world, training, rules, pool_rng, size=config.pool_size)
        unique = dedupe_pool(bundle.records)
        unique_wrong = sum(
            1
            for record in unique
            if is_bug(bundle.goldens[record.id], record.predicted_frame, world.ontology)
        )
        stats = PoolStats(
            seed=seed,
            records=len(bundle.records),
            unique=len(unique),
            unique_wrong=unique_wrong,
        )
        pools.append(stats)

        for strategy in (SamplingStrategy.LEAST_CONFIDENCE, SamplingStrategy.RANDOM):
            chosen = sample_candidates(
                bundle.records,
                SamplingConfig(
                    k=config.k,
                    pool_size=len(bundle.records),
                    strategy=strategy,
                    seed=seed,
                ),
            )
            failures = sum(1 for r in chosen if not task_success_proxy(r))
            bugs = sum(
                1
                for r in chosen
                if is_bug(bundle.goldens[r.id], r.predicted_frame, world.ontology)
            )
            arms.append(
                ArmResult(
                    seed=seed,
                    strategy=strategy.value,
                    selected=len(chosen),
                    task_failures=failures,
                    bugs=bugs,
                )
            )
            if strategy is SamplingStrategy.LEAST_CONFIDENCE:
                precisions.append(bugs / len(chosen) if chosen else 0.0)

        if calibration is None:
            graded = [
                (record, bundle.goldens[record.id])
                for record in unique
            ]
            split = misclassification_split(graded, world.ontology)
            calibration = CalibrationReport(
                misclassified_count=len(split.misclassified),
                correct_count=len(split.correct),
                high_uncertainty_fraction=split.high_uncertainty_fraction,
                misclassified_histogram=tuple(
                    score_histogram(list(split.misclassified), config.bins)
                ),
                correct_histogram=tuple(
                    score_histogram(list(split.correct), config.bins)
                ),
            )

    def mean(values: list[float]) -> float:
        return sum(values) / len(values)

    lc_failures = [a.task_failures for a in arms if a.strategy == "least_confidence"]
    rnd_failures = [a.task_failures for a in arms if a.strategy == "random"]
    lc_bugs = [a.bugs for a in arms if a.strategy == "least_confidence"]
    rnd_bugs = [a.bugs for a in arms if a.strategy == "random"]

    assert calibration is not None
    return SamplingReport(
        config=config,
        pools=tuple(pools),
        arms=tuple(arms),
        mean_lc_failures=mean(lc_failures),
        mean_random_failures=mean(rnd_failures),
        failure_ratio=_ratio(mean(lc_failures), mean(rnd_failures)),
        mean_lc_bugs=mean(lc_bugs),
        mean_random_bugs=mean(rnd_bugs),
        bug_ratio=_ratio(mean(lc_bugs), mean(rnd_bugs)),
        mean_base_error_rate=mean([p.base_error_rate for p in pools]),
        mean_top_k_precision=mean(precisions),
        calibration=calibration,
    )


def _render_histogram(bins: tuple[HistogramBin, ...]) -> str:
    return " ".join(f"[{b.lo:.1f},{b.hi:.1f}):{b.count}" for b in bins)


def render_sampling_report(report: SamplingReport) -> str:
    config = report.config
    lines = [
        "uncertainty sampling vs random review",
        f"pool size {config.pool_size}, review budget k={config.k}, "
        f"seeds {list(config.seeds)}",
        "",
        "per seed:",
    ]
    for stats in report.pools:
        lines.append(
            f"  seed {stats.seed}: {stats.records} records, "
            f"{stats.unique} unique, base error rate {stats.base_error_rate:.4f}"
        )
    for arm in report.arms:
        lines.append(
            f"  seed {arm.seed} {arm.strategy}: "
            f"{arm.task_failures}/{arm.selected} task failures, "
            f"{arm.bugs}/{arm.selected} parse bugs"
        )
    lines += [
        "",
        "aggregate over seeds:",
        f"  task failures per {config.k}: least_confidence {report.mean_lc_failures:.1f}, "
        f"random {report.mean_random_failures:.1f}, ratio {report.failure_ratio:.2f}x",
        f"  parse bugs per {config.k}: least_confidence {report.mean_lc_bugs:.1f}, "
        f"random {report.mean_random_bugs:.1f}, ratio {report.bug_ratio:.2f}x",
        f"  top k precision {report.mean_top_k_precision:.4f} "
        f"vs base error rate {report.mean_base_error_rate:.4f} "
        f"({_ratio(report.mean_top_k_precision, report.mean_base_error_rate):.2f}x)",
        "",
        f"calibration (uncertainty scores, seed {report.pools[0].seed} pool):",
        f"  misclassified n={report.calibration.misclassified_count}: "
        f"{_render_histogram(report.calibration.misclassified_histogram)}",
        f"  correct       n={report.calibration.correct_count}: "
        f"{_render_histogram(report.calibration.correct_histogram)}",
        f"  misclassified with uncertainty > 0.5: "
        f"{report.calibration.high_uncertainty_fraction:.4f}",
    ]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# augmentation experiment


@dataclass(frozen=True)
class AugmentExperimentConfig:
    seed: int = 0
    covered_count: int = 140
    uncovered_count: int = 60
    eval_size: int = 150

    @property
    def bug_count(self) -> int:
        return self.covered_count + self.uncovered_count


@dataclass(frozen=True)
class ConditionResult:
    name: str
    training_size: int
    bugs_fixed: int
    bug_accuracy: float
    validation_accuracy: float
    test_accuracy: float


@dataclass(frozen=True)
class AugmentReport:
    config: AugmentExperimentConfig
    baseline: ConditionResult
    exact_match: ConditionResult
    templated: ConditionResult

    @property
    def conditions(self) -> tuple[ConditionResult, ...]:
        return (self.baseline, self.exact_match, self.templated)


def _accuracy(model, cases: list[tuple[str, Frame]]) -> float:
    if not cases:
        return 0.0
    hits = 0
    for utterance, golden in cases:
        predicted, _conf = predict(model, utterance)
        if serialize_frame(predicted) == serialize_frame(golden):
            hits += 1
    return hits / len(cases)


def _evaluate(
    name: str,
    dataset: list[TrainingExample],
    world: World,
    bugs: list[SeedCase],
    validation: list[tuple[str, Frame]],
    test: list[tuple[str, Frame]],
) -> ConditionResult:
    model = train(dataset, world.gazetteers, world.ontology)
    bug_cases = [(case.utterance, case.golden) for case in bugs]
    bug_accuracy = _accuracy(model, bug_cases)
    return ConditionResult(
        name=name,
        training_size=len(dataset),
        bugs_fixed=round(bug_accuracy * len(bugs)),
        bug_accuracy=bug_accuracy,
        validation_accuracy=_accuracy(model, validation),
        test_accuracy=_accuracy(model, test),
    )


def run_augment_experiment(
    config: AugmentExperimentConfig = AugmentExperimentConfig(),
) -> AugmentReport:
    world = build_world()
    training = generate_training(world, random.Random(f"{config.seed}:train"))
    bugs = generate_seed_bugs(
        world,
        random.Random(f"{config.seed}:bugs"),
        covered_count=config.covered_count,
        uncovered_count=config.uncovered_count,
    )

    # validation: data the model has seen; test: unseen base skeleton combos
    eval_rng = random.Random(f"{config.seed}:eval")
    mislabeled_texts = {u for u, _g, _w in training.mislabeled}
    seen = [e for e in training.examples if e.weight == 1 and e.utterance not in mislabeled_texts]
    validation = [
        (e.utterance, e.frame)
        for e in eval_rng.sample(seen, min(config.eval_size, len(seen)))
    ]
    test: list[tuple[str, Frame]] = []
    slotful = [s for s in world.base_skeletons if s.slots]
    while len(test) < config.eval_size:
        skeleton = eval_rng.choice(slotful)
        utterance, frame = eval_rng.choice(
            sample_instances(skeleton, world.gazetteers, eval_rng, 8)
        )
        if utterance not in training.texts and all(u != utterance for u, _ in test):
            test.append((utterance, frame))

    # seeded bug objects carry the baseline model's own wrong predictions
    baseline_model = train(training.examples, world.gazetteers, world.ontology)
    bug_objects = []
    for i, case in enumerate(bugs):
        predicted, confidence = predict(baseline_model, case.utterance)
        bug = new_bug(
            f"seed-{i:03d}",
            case.utterance,
            predicted,
            uncertainty=1.0 - confidence,
            frequency=1,
            timestamp=float(i),
        )
        bug.golden_frame = case.golden
        bug_objects.append(bug)

    exact_dataset = list(training.examples)
    for bug in bug_objects:
        exact_dataset.extend(exact_match_proposal(bug).examples)

    templated_dataset = list(training.examples)
    existing = build_training_index(training.examples)
    added: set[str] = set()
    for i, bug in enumerate(bug_objects):
        proposal = templated_proposal(
            bug, world.ontology, world.gazetteers, seed=config.seed + i, existing=existing
        )
        if proposal is None:
            continue
        for example in proposal.examples:
            if example.utterance in added:
                continue
            added.add(example.utterance)
            templated_dataset.append(example)

    return AugmentReport(
        config=config,
        baseline=_evaluate("baseline", training.examples, world, bugs, validation, test),
        exact_match=_evaluate("exact_match", exact_dataset, world, bugs, validation, test),
        templated=_evaluate("templated", templated_dataset, world, bugs, validation, test),
    )


def render_augment_report(report: AugmentReport) -> str:
    config = report.config
    lines = [
        "correction strategies vs seeded regressions",
        f"seed {config.seed}: {config.bug_count} seeded bugs on unseen utterance shapes "
        f"({config.covered_count} gazetteer covered, {config.uncovered_count} uncovered)",
        "",
        f"{'condition':<12} {'train size':>10} {'bugs fixed':>10} "
        f"{'bug acc':>8} {'valid acc':>9} {'test acc':>8}",
    ]
    for cond in report.conditions:
        lines.append(
            f"{cond.name:<12} {cond.training_size:>10} "
            f"{cond.bugs_fixed:>6}/{config.bug_count:<3} "
            f"{cond.bug_accuracy:>8.4f} {cond.validation_accuracy:>9.4f} "
            f"{cond.test_accuracy:>8.4f}"
        )
    baseline = report.baseline
    lines.append("")
    for cond in (report.exact_match, report.templated):
        lines.append(
            f"{cond.name} vs baseline: "
            f"{cond.bugs_fixed - baseline.bugs_fixed:+d} bugs fixed, "
            f"bug accuracy {cond.bug_accuracy - baseline.bug_accuracy:+.4f}, "
            f"test accuracy {cond.test_accuracy - baseline.test_accuracy:+.4f}"
        )
    return "\n".join(lines) + "\n"
