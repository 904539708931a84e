"""Synthetic corpus generators: NLI sentence pairs with provable labels,
a word-substitution cipher standing in for a second language, and the
hotel-review analog for the aspect/sentiment/topic tasks.

Labels are true by construction: entailment generalizes the predicate
(soccer -> a sport), contradiction negates or flips it, and neutral draws
the hypothesis predicate from a pool disjoint from every premise
predicate, so an independent rule evaluator can re-derive each label from
the text alone.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .data import AbsaExample, NEGATIVE, NliExample, POSITIVE, ParallelPair
from .errors import CoverageError, DataError
from .nli import CLASSES, CONTRADICTION, ENTAILMENT, NEUTRAL
from .vocab import normalize_text

BASE_SUBJECTS = (
    "a man",
    "a woman",
    "a child",
    "a dog",
    "two men",
    "two women",
    "the team",
    "an artist",
    "a student",
    "an old man",
)


@dataclass(frozen=True)
class PredicateFamily:
    """A predicate with its generalization and its negated counterpart."""

    specific: str
    general: str
    opposite: str


BASE_FAMILIES = (
    PredicateFamily("plays soccer", "plays a sport", "never plays soccer"),
    PredicateFamily("eats an apple", "eats a fruit", "never eats an apple"),
    PredicateFamily("drinks water", "drinks a beverage", "never drinks water"),
    PredicateFamily("drives a truck", "drives a vehicle", "never drives a truck"),
    PredicateFamily("sings a song", "makes music", "never sings a song"),
    PredicateFamily("reads a novel", "reads a book", "never reads a novel"),
    PredicateFamily("is sleeping", "is resting", "is awake"),
    PredicateFamily("runs a marathon", "does exercise", "never runs a marathon"),
    PredicateFamily("paints a portrait", "makes art", "never paints a portrait"),
    PredicateFamily("bakes bread", "cooks food", "never bakes bread"),
)

BASE_UNRELATED = (
    "holds an umbrella",
    "wears a hat",
    "owns a bicycle",
    "carries a backpack",
    "watches the sky",
    "waits for a bus",
)

_CONSONANTS = "bdfglmnprstvz"
_VOWELS = "aeiou"


def _make_word(index: int) -> str:
    """Deterministic pronounceable pseudo-word; distinct per index."""
    syllables = []
    index += 1
    while index:
        index, digit = divmod(index, len(_CONSONANTS) * len(_VOWELS))
        syllables.append(_CONSONANTS[digit % len(_CONSONANTS)] + _VOWELS[digit // len(_CONSONANTS)])
    return "".join(syllables) or "ba"


@dataclass(frozen=True)
class Grammar:
    """Closed template grammar; every label decision reduces to its tables."""

    subjects: tuple[str, ...]
    families: tuple[PredicateFamily, ...]
    unrelated: tuple[str, ...]

    def hypernyms(self) -> dict[str, str]:
        return {f.specific: f.general for f in self.families}

    def opposites(self) -> dict[str, str]:
        return {f.specific: f.opposite for f in self.families}

    def predicates(self) -> list[str]:
        seen: list[str] = []
        for family in self.families:
            seen.extend((family.specific, family.general, family.opposite))
        seen.extend(self.unrelated)
        return seen

    def words(self) -> list[str]:
        bag: set[str] = set()
        for phrase in list(self.subjects) + self.predicates():
            bag.update(phrase.lower().split())
        return sorted(bag)


def build_grammar(grammar_size: int = 16) -> Grammar:
    """Grammar with ``grammar_size`` predicate families; extra families and
    unrelated predicates beyond the hand-written base use synthesized verbs.
    """
    if grammar_size < 10:
        raise ValueError(f"grammar_size must be at least 10, got {grammar_size}")
    families = list(BASE_FAMILIES)
    for i in range(len(BASE_FAMILIES), grammar_size):
        verb = _make_word(i)
        families.append(
            PredicateFamily(f"often {verb}s", f"{verb}s", f"never {verb}s")
        )
    unrelated = list(BASE_UNRELATED)
    for i in range(len(BASE_UNRELATED), max(6, grammar_size // 2)):
        unrelated.append(f"{_make_word(1000 + i)}s")
    grammar = Grammar(BASE_SUBJECTS, tuple(families[:grammar_size]), tuple(unrelated))
    phrases = grammar.predicates()
    if len(set(phrases)) != len(phrases):
        raise ValueError("synthesized predicates collided with the base lexicon")
    return grammar


def gen_synthetic_nli(seed: int, n: int, grammar_size: int = 16) -> list[NliExample]:
    """Template-generated NLI set, class-balanced to within one example."""
    if n < 3:
        raise ValueError(f"need at least 3 examples, got {n}")
    grammar = build_grammar(grammar_size)
    rng = np.random.default_rng(seed)
    counts = {label: n // 3 for label in CLASSES}
    for label in CLASSES[: n % 3]:
        counts[label] += 1
    examples = []
    for label, count in counts.items():
        for _ in range(count):
            subject = grammar.subjects[rng.integers(len(grammar.subjects))]
            family = grammar.families[rng.integers(len(grammar.families))]
            premise = f"{subject} {family.specific}"
            if label == ENTAILMENT:
                hypothesis = f"{subject} {family.general}"
            elif label == CONTRADICTION:
                hypothesis = f"{subject} {family.opposite}"
            else:
                other = grammar.unrelated[rng.integers(len(grammar.unrelated))]
                hypothesis = f"{subject} {other}"
            examples.append(NliExample(premise, hypothesis, label))
    order = rng.permutation(len(examples))
    return [examples[i] for i in order]


def _split_clause(sentence: str, grammar: Grammar) -> tuple[str, str]:
    text = normalize_text(sentence).lower()
    for subject in sorted(grammar.subjects, key=len, reverse=True):
        if text.startswith(subject + " "):
            return subject, text[len(subject) + 1 :]
    raise DataError(f"no known subject in {sentence!r}")


def derive_label(premise: str, hypothesis: str, grammar: Grammar) -> str:
    """Independent rule evaluator: re-derive the gold label from the text.

    This is deliberately separate from the generator's per-class templates;
    it reasons only from the hypernym/opposite tables.
    """
    subj_p, pred_p = _split_clause(premise, grammar)
    subj_h, pred_h = _split_clause(hypothesis, grammar)
    if subj_p != subj_h:
        return NEUTRAL
    if pred_h == pred_p or grammar.hypernyms().get(pred_p) == pred_h:
        return ENTAILMENT
    if grammar.opposites().get(pred_p) == pred_h:
        return CONTRADICTION
    return NEUTRAL


def gen_sentences(seed: int, n: int, grammar: Grammar) -> list[str]:
    """Generic in-domain sentences (the distillation corpus source side)."""
    rng = np.random.default_rng(seed)
    predicates = grammar.predicates()
    sentences = []
    for _ in range(n):
        subject = grammar.subjects[rng.integers(len(grammar.subjects))]
        predicate = predicates[rng.integers(len(predicates))]
        sentences.append(f"{subject} {predicate}")
    return sentences


# ---------------------------------------------------------------------------
# word-substitution cipher (the synthetic target language)


@dataclass(frozen=True)
class CipherSpec:
    """Injective word map standing in for a translation direction."""

    seed: int
    substitution: dict[str, str]

    def __post_init__(self):
        values = list(self.substitution.values())
        if len(set(values)) != len(values):
            raise ValueError("substitution map must be injective")

    def inverse(self) -> dict[str, str]:
        return {target: source for source, target in self.substitution.items()}


def build_cipher(words: Iterable[str], seed: int) -> CipherSpec:
    """Fixed-point-free permutation of the vocabulary, deterministic per seed."""
    unique = sorted({w.lower() for w in words})
    if len(unique) < 2:
        raise ValueError("need at least two words to build a cipher")
    rng = np.random.default_rng(seed)
    shuffled = [unique[i] for i in rng.permutation(len(unique))]
    substitution = {
        shuffled[i]: shuffled[(i + 1) % len(shuffled)] for i in range(len(shuffled))
    }
    return CipherSpec(seed, substitution)


def _substitute(sentence: str, mapping: dict[str, str], passthrough: bool) -> str:
    words = normalize_text(sentence).lower().split()
    out = []
    for word in words:
        if word in mapping:
            out.append(mapping[word])
        elif passthrough:
            out.append(word)
        else:
            raise CoverageError(f"word {word!r} not covered by the substitution map")
    return " ".join(out)


def cipher_sentence(sentence: str, spec: CipherSpec, passthrough: bool = False) -> str:
    return _substitute(sentence, spec.substitution, passthrough)


def decipher_sentence(sentence: str, spec: CipherSpec, passthrough: bool = False) -> str:
    return _substitute(sentence, spec.inverse(), passthrough)


def cipher_nli(examples: Sequence[NliExample], spec: CipherSpec, passthrough: bool = False) -> list[NliExample]:
    """Cipher premise and hypothesis; labels carry over verbatim."""
    return [
        NliExample(
            cipher_sentence(e.premise, spec, passthrough),
            cipher_sentence(e.hypothesis, spec, passthrough),
            e.label,
        )
        for e in examples
    ]


def parallel_from_sentences(
    sentences: Sequence[str], spec: CipherSpec, passthrough: bool = False
) -> list[ParallelPair]:
    return [
        ParallelPair(s, cipher_sentence(s, spec, passthrough)) for s in sentences
    ]


def save_cipher(spec: CipherSpec, path) -> None:
    lines = [f"{src}\t{dst}" for src, dst in sorted(spec.substitution.items())]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_cipher(path, seed: int = 0) -> CipherSpec:
    substitution = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        source, target = line.split("\t")
        substitution[source] = target
    return CipherSpec(seed, substitution)


# ---------------------------------------------------------------------------
# hotel-review analog for the sentiment / topic / aspect tasks

ABSA_TOPICS = ("cleanliness", "staff", "location", "price", "food", "wifi", "comfort")

_TOPIC_PHRASES = {
    "cleanliness": (
        ("the room was spotless", "the bathroom sparkled"),
        ("the room was filthy", "dust covered every shelf"),
    ),
    "staff": (
        ("the staff was friendly", "reception helped us immediately"),
        ("the staff was rude", "reception ignored every request"),
    ),
    "location": (
        ("the hotel sits close to the station", "every sight was a short walk away"),
        ("the hotel sits far from everything", "the area felt unsafe at night"),
    ),
    "price": (
        ("the rate was a bargain", "breakfast was included for free"),
        ("the rate was overpriced", "they charged extra for towels"),
    ),
    "food": (
        ("the restaurant served delicious meals", "the breakfast buffet was superb"),
        ("the restaurant served bland meals", "the breakfast buffet was stale"),
    ),
    "wifi": (
        ("the wifi was fast everywhere", "streaming worked without a hitch"),
        ("the wifi kept dropping", "the connection crawled in the evening"),
    ),
    "comfort": (
        ("the bed was wonderfully soft", "the room stayed quiet all night"),
        ("the bed was lumpy and hard", "street noise kept us awake"),
    ),
}


def gen_synthetic_absa(seed: int, n: int, topic_set_size: int = 7) -> list[AbsaExample]:
    """Review snippets over a closed topic set with a known sentiment each."""
    if not 1 <= topic_set_size <= len(ABSA_TOPICS):
        raise ValueError(f"topic_set_size must be in [1, {len(ABSA_TOPICS)}]")
    if n < 1:
        raise ValueError("need at least one example")
    topics = ABSA_TOPICS[:topic_set_size]
    rng = np.random.default_rng(seed)
    examples = []
    for i in range(n):
        topic = topics[int(rng.integers(len(topics)))]
        sentiment = POSITIVE if rng.integers(2) == 0 else NEGATIVE
        phrases = _TOPIC_PHRASES[topic][0 if sentiment == POSITIVE else 1]
        text = phrases[int(rng.integers(len(phrases)))]
        split = "train" if rng.random() < 0.8 else "test"
        examples.append(AbsaExample(text, topic, sentiment, split, topic_set_size))
    return examples
