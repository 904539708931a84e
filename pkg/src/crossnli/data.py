"""Dataset record types, tab-separated file formats, and balancing.

File formats (UTF-8, no header, one record per line):
  - NLI / RTE: premise TAB hypothesis TAB label (labels lowercase)
  - ABSA analog: text TAB topic TAB sentiment TAB split
  - parallel corpus: source sentence TAB target sentence
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DataError, ParseError
from .nli import CLASSES

NO_ENTAILMENT = "no-entailment"
RTE_CLASSES = (CLASSES[0], NO_ENTAILMENT)

POSITIVE = "positive"
NEGATIVE = "negative"
SENTIMENTS = (POSITIVE, NEGATIVE)


@dataclass(frozen=True)
class NliExample:
    premise: str
    hypothesis: str
    label: str

    def __post_init__(self):
        if not self.premise.strip() or not self.hypothesis.strip():
            raise ValueError("premise and hypothesis must be non-empty")
        if self.label not in CLASSES:
            raise ValueError(f"unknown NLI label {self.label!r}")


@dataclass(frozen=True)
class RteExample:
    premise: str
    hypothesis: str
    label: str

    def __post_init__(self):
        if not self.premise.strip() or not self.hypothesis.strip():
            raise ValueError("premise and hypothesis must be non-empty")
        if self.label not in RTE_CLASSES:
            raise ValueError(f"unknown RTE label {self.label!r}")


@dataclass(frozen=True)
class AbsaExample:
    text: str
    topic: str
    sentiment: str
    split: str = "train"
    topic_set_size: int = 7

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("text must be non-empty")
        if self.sentiment not in SENTIMENTS:
            raise ValueError(f"unknown sentiment {self.sentiment!r}")


@dataclass(frozen=True)
class ParallelPair:
    source_sentence: str
    target_sentence: str

    def __post_init__(self):
        if not self.source_sentence.strip() or not self.target_sentence.strip():
            raise ValueError("parallel sentences must be non-empty")


def _read_rows(path, expected_columns: int) -> list[tuple[int, list[str]]]:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    rows = []
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != expected_columns:
            raise ParseError(
                f"expected {expected_columns} tab-separated fields, got {len(fields)}", number
            )
        rows.append((number, fields))
    if not rows:
        raise DataError(f"no records in {path}")
    return rows


def load_nli(path) -> list[NliExample]:
    examples = []
    for number, (premise, hypothesis, label) in _read_rows(path, 3):
        try:
            examples.append(NliExample(premise, hypothesis, label.strip().lower()))
        except ValueError as exc:
            raise ParseError(str(exc), number) from exc
    return examples


def save_nli(examples: Iterable[NliExample], path) -> None:
    lines = [f"{e.premise}\t{e.hypothesis}\t{e.label}" for e in examples]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_rte(path) -> list[RteExample]:
    examples = []
    for number, (premise, hypothesis, label) in _read_rows(path, 3):
        try:
            examples.append(RteExample(premise, hypothesis, label.strip().lower()))
        except ValueError as exc:
            raise ParseError(str(exc), number) from exc
    return examples


def save_rte(examples: Iterable[RteExample], path) -> None:
    lines = [f"{e.premise}\t{e.hypothesis}\t{e.label}" for e in examples]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_absa(path) -> list[AbsaExample]:
    rows = _read_rows(path, 4)
    topics = sorted({fields[1].strip().lower() for _, fields in rows})
    examples = []
    for number, (text, topic, sentiment, split) in rows:
        try:
            examples.append(
                AbsaExample(
                    text,
                    topic.strip().lower(),
                    sentiment.strip().lower(),
                    split.strip().lower(),
                    topic_set_size=len(topics),
                )
            )
        except ValueError as exc:
            raise ParseError(str(exc), number) from exc
    return examples


def save_absa(examples: Iterable[AbsaExample], path) -> None:
    lines = [f"{e.text}\t{e.topic}\t{e.sentiment}\t{e.split}" for e in examples]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_parallel(path) -> list[ParallelPair]:
    pairs = []
    for number, (source, target) in _read_rows(path, 2):
        try:
            pairs.append(ParallelPair(source, target))
        except ValueError as exc:
            raise ParseError(str(exc), number) from exc
    return pairs


def save_parallel(pairs: Iterable[ParallelPair], path) -> None:
    lines = [f"{p.source_sentence}\t{p.target_sentence}" for p in pairs]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def rte_from_nli(examples: Iterable[NliExample]) -> list[RteExample]:
    """Collapse 3-class gold labels to the 2-class RTE convention."""
    collapsed = []
    for e in examples:
        label = CLASSES[0] if e.label == CLASSES[0] else NO_ENTAILMENT
        collapsed.append(RteExample(e.premise, e.hypothesis, label))
    return collapsed


def balance_sample(
    examples: Sequence,
    is_positive: Callable[[object], bool],
    negatives_per_positive: int,
    seed: int,
) -> list:
    """1:k balancing: keep every positive, add k uniform negatives per positive.

    Negatives are drawn without replacement; a deficit is reported rather
    than silently under-sampling.
    """
    if negatives_per_positive < 1:
        raise ValueError("ratio must be at least 1:1")
    positives = [e for e in examples if is_positive(e)]
    negatives = [e for e in examples if not is_positive(e)]
    if not positives:
        raise DataError("no positive examples to balance around")
    need = negatives_per_positive * len(positives)
    if need > len(negatives):
        raise DataError(
            f"insufficient negatives: need {need}, have {len(negatives)} "
            f"(deficit {need - len(negatives)})"
        )
    rng = np.random.default_rng(seed)
    chosen = rng.choice(len(negatives), size=need, replace=False)
    return positives + [negatives[i] for i in sorted(chosen)]
