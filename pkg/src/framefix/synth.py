"""Synthetic inputs: random frame trees and a parameterized toy assistant corpus.

The random tree builders exercise the parser and differ over a far wider
shape space than handwritten fixtures.  The corpus generator further down
builds a small but realistic assistant world (domains, intents, gazetteers,
training data, logged traffic) with planted defects so that detection,
attribution, and correction have something honest to find.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Sequence

from .correction import Gazetteer, RuleStore, generate_rule
from .frames import DEFAULT_MAX_DEPTH, Frame, Slot, parse_frame, serialize_frame
from .ontology import Ontology, SlotSpec
from .records import DialogAct, LoggedRequest, TrainingExample, quantize_ts

_GEN_WORDS = (
    "play music stop the a my that song timer weather call mom Boston jazz "
    "please now again loud quiet set cancel five ten minutes what is like "
    "tomorrow today Monday radio station news volume up down lights on off "
    "kitchen bedroom remind me to buy milk eggs 7 42 pm am o'clock next last"
).split()

_GEN_INTENTS = (
    "PLAY_MUSIC PAUSE_MUSIC CREATE_CALL GET_WEATHER CREATE_TIMER CANCEL_TIMER "
    "SEND_MESSAGE TURN_ON GET_INFO UNSUPPORTED NAVIGATE SET_REMINDER"
).split()

_GEN_SLOTS = (
    "PLAYLIST_NAME MUSIC_TYPE CONTACT LOCATION DATE_TIME DURATION DEVICE "
    "MESSAGE ORDINAL AMOUNT"
).split()


def random_frame(
    rng: random.Random,
    max_depth: int = DEFAULT_MAX_DEPTH,
    intent_labels: Sequence[str] = _GEN_INTENTS,
    slot_labels: Sequence[str] = _GEN_SLOTS,
    words: Sequence[str] = _GEN_WORDS,
) -> Frame:
    """A random well-formed frame within the given nesting budget."""

    def build_frame(depth: int, at_root: bool) -> Frame:
        label = rng.choice(intent_labels)
        count = rng.randint(1, 5) if at_root else rng.randint(0, 3)
        children: list = []
        for _ in range(count):
            if depth + 1 <= max_depth and rng.random() < 0.35:
                children.append(build_slot(depth + 1))
            else:
                children.append(rng.choice(words))
        return Frame(label, tuple(children))

    def build_slot(depth: int) -> Slot:
        label = rng.choice(slot_labels)
        children: list = []
        for _ in range(rng.randint(1, 3)):
            if depth + 1 <= max_depth and rng.random() < 0.25:
                children.append(build_frame(depth + 1, at_root=False))
            else:
                children.append(rng.choice(words))
        slot = Slot(label, tuple(children))
        if not slot.tokens():
            # nested intents may all be empty; slots may not be
            children.append(rng.choice(words))
            slot = Slot(label, tuple(children))
        return slot

    return build_frame(1, at_root=True)


def random_frame_over_tokens(
    tokens: Sequence[str],
    rng: random.Random,
    max_depth: int = DEFAULT_MAX_DEPTH,
    intent_labels: Sequence[str] = _GEN_INTENTS,
    slot_labels: Sequence[str] = _GEN_SLOTS,
) -> Frame:
    """A random bracketing of a fixed token sequence.

    Two calls over the same tokens give structurally different frames with
    identical token sequences, which is exactly what diffing needs.
    """
    toks = list(tokens)

    def build_frame(lo: int, hi: int, depth: int) -> Frame:
        label = rng.choice(intent_labels)
        children: list = []
        i = lo
        while i < hi:
            if depth + 1 <= max_depth and hi - i >= 1 and rng.random() < 0.4:
                j = rng.randint(i + 1, hi)
                children.append(build_slot(i, j, depth + 1))
                i = j
            else:
                children.append(toks[i])
                i += 1
        return Frame(label, tuple(children))

    def build_slot(lo: int, hi: int, depth: int) -> Slot:
        label = rng.choice(slot_labels)
        children: list = []
        i = lo
        empty_used = False
        while i < hi:
            if depth + 1 <= max_depth and rng.random() < 0.3:
                if not empty_used and rng.random() < 0.1:
                    # a nested intent that covers no tokens is legal
                    children.append(build_frame(i, i, depth + 1))
                    empty_used = True
                    continue
                j = rng.randint(i + 1, hi)
                children.append(build_frame(i, j, depth + 1))
                i = j
            else:
                children.append(toks[i])
                i += 1
        return Slot(label, tuple(children))

    return build_frame(0, len(toks), 1)


def random_tokens(rng: random.Random, lo: int = 1, hi: int = 12) -> list[str]:
    return [rng.choice(_GEN_WORDS) for _ in range(rng.randint(lo, hi))]


# ---------------------------------------------------------------------------
# toy assistant world
#
# A fixed set of intents, slot gazetteers, and utterance skeletons large
# enough that exhaustive memorization is impossible (the base skeletons span
# over 14,000 distinct utterances) yet small enough that experiments finish
# in seconds.  Each gazetteer keeps a second, held out value list that never
# enters training, which is how coverage gaps are planted.


_PLACEHOLDER = re.compile(r"\{([A-Z][A-Z0-9_]*)\}")


@dataclass(frozen=True)
class Skeleton:
    """One utterance shape: a frame string with {SLOT} value placeholders."""

    name: str
    intent: str
    template: str

    @property
    def slots(self) -> tuple[str, ...]:
        return tuple(_PLACEHOLDER.findall(self.template))


@dataclass(frozen=True)
class World:
    ontology: Ontology
    gazetteers: Gazetteer
    heldout_values: dict[str, tuple[tuple[str, ...], ...]]
    base_skeletons: tuple[Skeleton, ...]
    heldout_skeletons: tuple[Skeleton, ...]


def _vals(*items: str) -> tuple[tuple[str, ...], ...]:
    return tuple(tuple(item.split()) for item in items)


_GAZETTEERS = {
    "MUSIC_TYPE": _vals(
        "jazz", "rock", "pop", "blues", "metal", "folk", "techno", "classical",
        "country", "reggae", "disco", "funk", "soul", "opera", "punk",
        "gospel", "salsa", "indie", "house", "trance",
    ),
    "PLAYLIST_NAME": _vals(
        "morning run", "deep focus", "gym", "road trip", "chill vibes",
        "study beats", "summer hits", "throwback", "piano moods", "workout",
        "dance party", "lazy sunday", "coding flow", "dinner jazz",
        "happy days", "slow burn", "top forty", "fresh finds", "night owl",
        "campfire",
    ),
    "CONTACT": _vals(
        "alice", "bob", "carol", "david", "emma", "frank", "grace", "henry",
        "isabel", "jack", "karen", "liam", "maria", "nathan", "olivia",
        "paula", "ray", "sofia", "tom", "ursula", "victor", "wendy",
        "xavier", "yara", "zack", "aunt june", "uncle joe", "doctor smith",
        "coach kim", "grandma rose",
    ),
    "LOCATION": _vals(
        "boston", "new york", "chicago", "seattle", "austin", "denver",
        "miami", "portland", "san francisco", "los angeles", "houston",
        "phoenix", "atlanta", "dallas", "detroit", "nashville", "memphis",
        "baltimore", "milwaukee", "albuquerque", "fresno", "sacramento",
        "mesa", "oakland", "tulsa", "wichita", "arlington", "tampa",
        "new orleans", "minneapolis",
    ),
    "DATE_TIME": _vals(
        "today", "tomorrow", "tonight", "this evening", "next monday",
        "this weekend", "noon", "five pm", "six am", "next tuesday",
        "this morning", "next week", "midnight", "seven thirty",
        "friday afternoon",
    ),
    "TIMER_DURATION": _vals(
        "five minutes", "ten minutes", "half an hour", "one hour",
        "twenty minutes", "two hours", "ninety seconds", "three minutes",
        "fifteen minutes", "one minute", "forty five minutes", "two minutes",
    ),
    "TIMER_NAME": _vals(
        "pasta", "laundry", "workout", "meeting", "tea", "nap", "oven",
        "parking", "pizza", "homework", "stretch", "coffee",
    ),
}

_HELDOUT_VALUES = {
    "MUSIC_TYPE": _vals(
        "grunge", "ska", "swing", "bluegrass", "dubstep", "emo", "hiphop",
        "grime", "bossa", "flamenco",
    ),
    "PLAYLIST_NAME": _vals(
        "rainy day", "power hour", "cool down", "night drive", "zen garden",
        "sunday brunch", "heavy lifts", "tropical mix", "space out",
        "golden oldies",
    ),
    "CONTACT": _vals(
        "peter", "quinn", "rosa", "sam", "tina", "umar", "vera", "will",
        "cousin lee", "professor chan", "nurse kelly", "captain cole",
    ),
    "LOCATION": _vals(
        "las vegas", "tucson", "omaha", "boise", "reno", "spokane",
        "savannah", "lexington", "salt lake city", "anchorage", "honolulu",
        "pittsburgh",
    ),
    "DATE_TIME": _vals(
        "next friday", "dawn", "nine pm", "monday morning", "dusk",
        "new years eve",
    ),
    "TIMER_DURATION": _vals(
        "seven minutes", "a quarter hour", "six hours", "thirty seconds",
        "eight minutes", "an hour and a half",
    ),
    "TIMER_NAME": _vals("bread", "garden", "grill", "yoga", "pottery", "studying"),
}

_BASE_SKELETONS = (
    Skeleton("play_genre", "PLAY_MUSIC",
             "[IN:PLAY_MUSIC play some [SL:MUSIC_TYPE {MUSIC_TYPE} ] ]"),
    Skeleton("play_genre_for", "PLAY_MUSIC",
             "[IN:PLAY_MUSIC play some [SL:MUSIC_TYPE {MUSIC_TYPE} ] for "
             "[SL:CONTACT {CONTACT} ] [SL:DATE_TIME {DATE_TIME} ] ]"),
    Skeleton("play_playlist", "PLAY_MUSIC",
             "[IN:PLAY_MUSIC play my [SL:PLAYLIST_NAME {PLAYLIST_NAME} ] playlist ]"),
    Skeleton("play_playlist_when", "PLAY_MUSIC",
             "[IN:PLAY_MUSIC play my [SL:PLAYLIST_NAME {PLAYLIST_NAME} ] playlist "
             "[SL:DATE_TIME {DATE_TIME} ] ]"),
    Skeleton("put_on", "PLAY_MUSIC",
             "[IN:PLAY_MUSIC put on [SL:MUSIC_TYPE {MUSIC_TYPE} ] music ]"),
    Skeleton("start_mix", "PLAY_MUSIC",
             "[IN:PLAY_MUSIC start my [SL:PLAYLIST_NAME {PLAYLIST_NAME} ] mix ]"),
    Skeleton("pause", "PAUSE_MUSIC", "[IN:PAUSE_MUSIC pause the music ]"),
    Skeleton("stop", "PAUSE_MUSIC", "[IN:PAUSE_MUSIC stop playing ]"),
    Skeleton("call", "CREATE_CALL", "[IN:CREATE_CALL call [SL:CONTACT {CONTACT} ] ]"),
    Skeleton("call_at", "CREATE_CALL",
             "[IN:CREATE_CALL call [SL:CONTACT {CONTACT} ] at "
             "[SL:DATE_TIME {DATE_TIME} ] ]"),
    Skeleton("dial", "CREATE_CALL",
             "[IN:CREATE_CALL dial [SL:CONTACT {CONTACT} ] for me ]"),
    Skeleton("call_back", "CREATE_CALL",
             "[IN:CREATE_CALL please call [SL:CONTACT {CONTACT} ] back "
             "[SL:DATE_TIME {DATE_TIME} ] ]"),
    Skeleton("text_late", "SEND_MESSAGE",
             "[IN:SEND_MESSAGE text [SL:CONTACT {CONTACT} ] that "
             "[SL:MESSAGE i am running late ] ]"),
    Skeleton("send_msg", "SEND_MESSAGE",
             "[IN:SEND_MESSAGE send [SL:CONTACT {CONTACT} ] a message saying "
             "[SL:MESSAGE hello ] ]"),
    Skeleton("msg_at", "SEND_MESSAGE",
             "[IN:SEND_MESSAGE message [SL:CONTACT {CONTACT} ] "
             "[SL:DATE_TIME {DATE_TIME} ] saying [SL:MESSAGE hello ] ]"),
    Skeleton("weather_in", "GET_WEATHER",
             "[IN:GET_WEATHER weather in [SL:LOCATION {LOCATION} ] ]"),
    Skeleton("weather_when", "GET_WEATHER",
             "[IN:GET_WEATHER weather in [SL:LOCATION {LOCATION} ] "
             "[SL:DATE_TIME {DATE_TIME} ] ]"),
    Skeleton("weather_q", "GET_WEATHER",
             "[IN:GET_WEATHER what is the weather in [SL:LOCATION {LOCATION} ] ]"),
    Skeleton("rain_in", "GET_WEATHER",
             "[IN:GET_WEATHER will it rain in [SL:LOCATION {LOCATION} ] "
             "[SL:DATE_TIME {DATE_TIME} ] ]"),
    Skeleton("forecast", "GET_WEATHER",
             "[IN:GET_WEATHER forecast for [SL:LOCATION {LOCATION} ] please ]"),
    Skeleton("set_timer", "CREATE_TIMER",
             "[IN:CREATE_TIMER set a timer for [SL:TIMER_DURATION {TIMER_DURATION} ] ]"),
    Skeleton("named_timer", "CREATE_TIMER",
             "[IN:CREATE_TIMER start a [SL:TIMER_NAME {TIMER_NAME} ] timer for "
             "[SL:TIMER_DURATION {TIMER_DURATION} ] ]"),
    Skeleton("timer_full", "CREATE_TIMER",
             "[IN:CREATE_TIMER set a [SL:TIMER_NAME {TIMER_NAME} ] timer for "
             "[SL:TIMER_DURATION {TIMER_DURATION} ] [SL:DATE_TIME {DATE_TIME} ] ]"),
    Skeleton("cancel_timer", "DELETE_TIMER",
             "[IN:DELETE_TIMER cancel my [SL:TIMER_NAME {TIMER_NAME} ] timer ]"),
    Skeleton("delete_timer", "DELETE_TIMER",
             "[IN:DELETE_TIMER delete the [SL:TIMER_NAME {TIMER_NAME} ] timer ]"),
    Skeleton("joke", "UNSUPPORTED", "[IN:UNSUPPORTED tell me a joke ]"),
    Skeleton("meaning", "UNSUPPORTED", "[IN:UNSUPPORTED what is the meaning of life ]"),
    Skeleton("thanks", "UNSUPPORTED", "[IN:UNSUPPORTED thank you so much ]"),
)

_HELDOUT_SKELETONS = (
    Skeleton("queue_playlist", "PLAY_MUSIC",
             "[IN:PLAY_MUSIC queue up the [SL:PLAYLIST_NAME {PLAYLIST_NAME} ] playlist ]"),
    Skeleton("shuffle_genre", "PLAY_MUSIC",
             "[IN:PLAY_MUSIC shuffle some [SL:MUSIC_TYPE {MUSIC_TYPE} ] tracks ]"),
    Skeleton("ring", "CREATE_CALL",
             "[IN:CREATE_CALL ring [SL:CONTACT {CONTACT} ] right away ]"),
    Skeleton("how_cold", "GET_WEATHER",
             "[IN:GET_WEATHER how cold is it in [SL:LOCATION {LOCATION} ] ]"),
    Skeleton("countdown", "CREATE_TIMER",
             "[IN:CREATE_TIMER give me a [SL:TIMER_DURATION {TIMER_DURATION} ] countdown ]"),
    Skeleton("ping", "SEND_MESSAGE",
             "[IN:SEND_MESSAGE ping [SL:CONTACT {CONTACT} ] with "
             "[SL:MESSAGE a quick update ] ]"),
    Skeleton("drop_timer", "DELETE_TIMER",
             "[IN:DELETE_TIMER drop the [SL:TIMER_NAME {TIMER_NAME} ] timer now ]"),
)


def build_world() -> World:
    domains = {
        "PLAY_MUSIC": "music",
        "PAUSE_MUSIC": "music",
        "CREATE_CALL": "calls",
        "SEND_MESSAGE": "calls",
        "GET_WEATHER": "weather",
        "CREATE_TIMER": "timer",
        "DELETE_TIMER": "timer",
        "UNSUPPORTED": "other",
    }
    slots = {
        label: SlotSpec(templatable=True, gazetteer=label) for label in _GAZETTEERS
    }
    slots["MESSAGE"] = SlotSpec(templatable=False)
    return World(
        ontology=Ontology(version=1, domains=domains, slots=slots),
        gazetteers=Gazetteer({k: v for k, v in _GAZETTEERS.items()}),
        heldout_values=dict(_HELDOUT_VALUES),
        base_skeletons=_BASE_SKELETONS,
        heldout_skeletons=_HELDOUT_SKELETONS,
    )


def instantiate(skeleton: Skeleton, values: Sequence[tuple[str, ...]]):
    """Fill the skeleton's placeholders in order; returns (utterance, frame)."""
    labels = skeleton.slots
    if len(labels) != len(values):
        raise ValueError(
            f"skeleton {skeleton.name} needs {len(labels)} values, got {len(values)}"
        )
    text = skeleton.template
    for label, value in zip(labels, values):
        text = text.replace("{" + label + "}", " ".join(value), 1)
    frame = parse_frame(text)
    return " ".join(frame.tokens()), frame


def _unrank(index: int, sizes: Sequence[int]) -> tuple[int, ...]:
    combo = []
    for size in reversed(sizes):
        index, digit = divmod(index, size)
        combo.append(digit)
    return tuple(reversed(combo))


def combo_count(skeleton: Skeleton, gazetteers: Gazetteer) -> int:
    total = 1
    for label in skeleton.slots:
        total *= len(gazetteers.values_for(label))
    return total


def world_capacity(world: World) -> int:
    """Number of distinct base utterances the covered gazetteers can produce."""
    return sum(combo_count(s, world.gazetteers) for s in world.base_skeletons)


def sample_instances(
    skeleton: Skeleton,
    gazetteers: Gazetteer,
    rng: random.Random,
    count: int,
):
    """Up to count distinct (utterance, frame) pairs for one skeleton."""
    if not skeleton.slots:
        return [instantiate(skeleton, [])]
    value_sets = [gazetteers.values_for(label) for label in skeleton.slots]
    sizes = [len(v) for v in value_sets]
    total = combo_count(skeleton, gazetteers)
    if total <= count:
        indices = range(total)
    else:
        indices = sorted(rng.sample(range(total), count))
    out = []
    for index in indices:
        combo = _unrank(index, sizes)
        out.append(instantiate(skeleton, [value_sets[i][c] for i, c in enumerate(combo)]))
    return out


def fallback_frame(tokens: Sequence[str]) -> Frame:
    return Frame("UNSUPPORTED", tuple(tokens))


_SIBLING_INTENT = {
    "PLAY_MUSIC": "PAUSE_MUSIC",
    "PAUSE_MUSIC": "PLAY_MUSIC",
    "CREATE_CALL": "SEND_MESSAGE",
    "SEND_MESSAGE": "CREATE_CALL",
    "GET_WEATHER": "UNSUPPORTED",
    "CREATE_TIMER": "DELETE_TIMER",
    "DELETE_TIMER": "CREATE_TIMER",
    "UNSUPPORTED": "PLAY_MUSIC",
}


def wrong_intent_frame(frame: Frame) -> Frame:
    """The same parse under a plausible but wrong sibling intent."""
    return Frame(_SIBLING_INTENT[frame.label], frame.children)


@dataclass
class TrainingBundle:
    examples: list[TrainingExample]
    # texts whose training entries conflict: (utterance, golden, planted wrong)
    mislabeled: list[tuple[str, Frame, Frame]]

    @property
    def texts(self) -> set[str]:
        return {e.utterance for e in self.examples}


def generate_training(
    world: World,
    rng: random.Random,
    combos_per_skeleton: int = 40,
    mislabel_count: int = 12,
) -> TrainingBundle:
    """Sampled base-skeleton dataset with planted annotation conflicts.

    Each mislabel adds a weight 3 duplicate of an existing utterance under a
    flat UNSUPPORTED frame, heavy enough to outvote the correct entry in any
    exact match table built from this data.
    """
    examples: list[TrainingExample] = []
    slotful: list[TrainingExample] = []
    for skeleton in world.base_skeletons:
        for utterance, frame in sample_instances(
            skeleton, world.gazetteers, rng, combos_per_skeleton
        ):
            example = TrainingExample(utterance, frame, weight=1)
            examples.append(example)
            if skeleton.slots:
                slotful.append(example)
    mislabeled: list[tuple[str, Frame, Frame]] = []
    for victim in rng.sample(slotful, min(mislabel_count, len(slotful))):
        wrong = fallback_frame(victim.frame.tokens())
        examples.append(TrainingExample(victim.utterance, wrong, weight=3))
        mislabeled.append((victim.utterance, victim.frame, wrong))
    return TrainingBundle(examples=examples, mislabeled=mislabeled)


@dataclass
class RuleBundle:
    store: RuleStore
    # stale rules: (utterance, rule frame, golden frame)
    stale: list[tuple[str, Frame, Frame]]


def generate_rules(
    world: World,
    training: TrainingBundle,
    rng: random.Random,
    stale_count: int = 8,
    fresh_count: int = 8,
) -> RuleBundle:
    """Deterministic rules over base utterances kept out of the training set.

    Stale rules pin the sibling intent, so they fire and disagree with the
    golden frame; fresh rules simply pin the correct parse.
    """
    taken = set(training.texts) | {u for u, _g, _w in training.mislabeled}
    store = RuleStore()
    stale: list[tuple[str, Frame, Frame]] = []
    fresh_left = fresh_count
    stale_left = stale_count
    skeletons = [s for s in world.base_skeletons if s.slots]
    attempts = 0
    while (stale_left or fresh_left) and attempts < 10_000:
        attempts += 1
        skeleton = rng.choice(skeletons)
        utterance, golden = sample_instances(skeleton, world.gazetteers, rng, 1)[0]
        if utterance in taken or store.match(utterance) is not None:
            continue
        taken.add(utterance)
        if stale_left:
            rule_frame = wrong_intent_frame(golden)
            store.add(generate_rule(utterance, rule_frame))
            stale.append((utterance, rule_frame, golden))
            stale_left -= 1
        else:
            store.add(generate_rule(utterance, golden))
            fresh_left -= 1
    if stale_left or fresh_left:
        raise RuntimeError("could not place the requested number of rules")
    return RuleBundle(store=store, stale=stale)


@dataclass(frozen=True)
class PoolMix:
    """Category fractions for generated traffic; the remainder after the
    defect categories is split between the two correct tiers."""

    correct_exact: float = 0.62
    correct_template: float = 0.24
    gap: float = 0.08
    mislabel: float = 0.02
    unknown: float = 0.03
    rule_conflict: float = 0.01


@dataclass
class PoolBundle:
    records: list[LoggedRequest]
    goldens: dict[str, Frame]
    category_by_id: dict[str, str]


_POOL_BASE_TS = 1_700_000_000.0


def _dialog_act(correct: bool, rng: random.Random) -> DialogAct:
    r = rng.random()
    if correct:
        if r < 0.95:
            return DialogAct.INFORM
        return DialogAct.OTHER if r < 0.98 else DialogAct.ERROR
    if r < 0.85:
        return DialogAct.ERROR
    return DialogAct.INFORM if r < 0.95 else DialogAct.OTHER


def _gap_instance(world: World, rng: random.Random):
    """An utterance the model cannot know: a held out skeleton, or a base
    skeleton filled with at least one held out value."""
    if rng.random() < 0.5:
        skeleton = rng.choice(world.heldout_skeletons)
        values = [
            rng.choice(
                world.gazetteers.values_for(label)
                + world.heldout_values.get(label, ())
            )
            for label in skeleton.slots
        ]
        return instantiate(skeleton, values)
    candidates = [
        s
        for s in world.base_skeletons
        if any(label in world.heldout_values for label in s.slots)
    ]
    skeleton = rng.choice(candidates)
    labels = skeleton.slots
    swap = rng.choice(
        [i for i, label in enumerate(labels) if label in world.heldout_values]
    )
    values = []
    for i, label in enumerate(labels):
        if i == swap:
            values.append(rng.choice(world.heldout_values[label]))
        else:
            values.append(rng.choice(world.gazetteers.values_for(label)))
    return instantiate(skeleton, values)


def generate_pool(
    world: World,
    training: TrainingBundle,
    rules: RuleBundle,
    rng: random.Random,
    size: int = 10_000,
    mix: PoolMix = PoolMix(),
) -> PoolBundle:
    """Logged traffic with known goldens and a planted defect composition.

    Confidence bands separate cleanly by category: correct parses score at
    most 0.4 uncertainty while coverage gaps score 0.7 to 0.9, so least
    confidence review finds gaps first.  Mislabel driven errors sit at 0.95+
    confidence, the blind spot least confidence provably cannot see.
    """
    goldens_by_text: dict[str, Frame] = {}
    mislabel_plants = training.mislabeled
    clean_examples = [
        e
        for e in training.examples
        if e.weight == 1 and e.utterance not in {u for u, _g, _w in mislabel_plants}
    ]
    slotful_skeletons = [s for s in world.base_skeletons if s.slots]

    plan = (
        ("mislabel", int(size * mix.mislabel)),
        ("unknown", int(size * mix.unknown)),
        ("rule_conflict", int(size * mix.rule_conflict)),
        ("gap", int(size * mix.gap)),
        ("correct_template", int(size * mix.correct_template)),
    )
    counts = dict(plan)
    counts["correct_exact"] = size - sum(counts.values())

    records: list[LoggedRequest] = []
    goldens: dict[str, Frame] = {}
    categories: dict[str, str] = {}

    def emit(category: str, utterance: str, golden: Frame, predicted: Frame, conf: float):
        rid = f"req-{len(records):06d}"
        correct = serialize_frame(predicted) == serialize_frame(golden)
        record = LoggedRequest(
            id=rid,
            utterance=utterance,
            predicted_frame=predicted,
            intent_confidence=round(conf, 4),
            frequency=min(40, max(1, int(rng.paretovariate(1.3)))),
            final_dialog_act=_dialog_act(correct, rng),
            timestamp=quantize_ts(_POOL_BASE_TS + rng.uniform(0, 30 * 86_400)),
        )
        prior = goldens_by_text.get(utterance)
        if prior is not None and serialize_frame(prior) != serialize_frame(golden):
            return  # same text cannot carry two goldens; skip the straggler
        goldens_by_text[utterance] = golden
        records.append(record)
        goldens[rid] = golden
        categories[rid] = category

    # texts the model would parse at the template tier: base skeleton shapes
    # filled with combinations the training sample happens to miss; the
    # candidate set stays wide so dedup keeps the pool mostly-correct
    per_skeleton = max(12, (2 * size) // (10 * max(1, len(slotful_skeletons))))
    template_candidates = []
    for skeleton in slotful_skeletons:
        for utterance, frame in sample_instances(
            skeleton, world.gazetteers, rng, per_skeleton
        ):
            if utterance not in training.texts:
                template_candidates.append((utterance, frame))

    for _ in range(counts["correct_exact"]):
        example = rng.choice(clean_examples)
        emit(
            "correct_exact",
            example.utterance,
            example.frame,
            example.frame,
            rng.uniform(0.95, 0.995),
        )
    for _ in range(counts["correct_template"]):
        utterance, frame = rng.choice(template_candidates)
        emit("correct_template", utterance, frame, frame, rng.uniform(0.6, 0.8))
    for _ in range(counts["gap"]):
        utterance, golden = _gap_instance(world, rng)
        emit(
            "gap",
            utterance,
            golden,
            fallback_frame(golden.tokens()),
            rng.uniform(0.1, 0.3),
        )
    for _ in range(counts["mislabel"]):
        utterance, golden, wrong = rng.choice(mislabel_plants)
        emit("mislabel", utterance, golden, wrong, rng.uniform(0.95, 0.99))
    for _ in range(counts["unknown"]):
        example = rng.choice(clean_examples)
        emit(
            "unknown",
            example.utterance,
            example.frame,
            wrong_intent_frame(example.frame),
            rng.uniform(0.6, 0.8),
        )
    for _ in range(counts["rule_conflict"]):
        utterance, rule_frame, golden = rng.choice(rules.stale)
        emit("rule_conflict", utterance, golden, rule_frame, rng.uniform(0.94, 0.99))

    order = list(range(len(records)))
    rng.shuffle(order)
    records = [records[i] for i in order]
    return PoolBundle(records=records, goldens=goldens, category_by_id=categories)


@dataclass(frozen=True)
class SeedCase:
    """One seeded regression for the augmentation experiment."""

    utterance: str
    golden: Frame
    covered: bool
    skeleton: str


def generate_seed_bugs(
    world: World,
    rng: random.Random,
    covered_count: int = 140,
    uncovered_count: int = 60,
) -> list[SeedCase]:
    """Bugs over held out skeletons, with an exact covered/uncovered split.

    Covered cases use gazetteer values (a mined template can fix them);
    uncovered cases use held out values (no template can bind them).  Cases
    rotate round robin across skeletons and never repeat an utterance.
    """

    def rotate(source: dict[str, tuple], want: int, covered: bool) -> list[SeedCase]:
        iters = []
        for skeleton in world.heldout_skeletons:
            (label,) = skeleton.slots
            values = list(source[label])
            rng.shuffle(values)
            iters.append((skeleton, iter(values)))
        out: list[SeedCase] = []
        while len(out) < want:
            progressed = False
            for skeleton, values in iters:
                if len(out) >= want:
                    break
                value = next(values, None)
                if value is None:
                    continue
                progressed = True
                utterance, golden = instantiate(skeleton, [value])
                out.append(SeedCase(utterance, golden, covered, skeleton.name))
            if not progressed:
                raise RuntimeError("not enough distinct values for seed bugs")
        return out

    cases = rotate(world.gazetteers.values, covered_count, covered=True)
    cases += rotate(world.heldout_values, uncovered_count, covered=False)
    return cases
