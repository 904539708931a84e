"""Task adapters: 3-class NLI evaluation, 2-class RTE via mapping, and the
fixed-hypothesis zero-shot protocol for sentiment, topic, and aspect tasks.

Zero-shot runs feed every record's text as the premise against one fixed
hypothesis, collapse the prediction through the task's label mapping, and
score against a gold rule derived from the record fields.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .data import AbsaExample, NliExample, POSITIVE, RTE_CLASSES, RteExample
from .errors import DataError
from .metrics import (
    EvalReport,
    LabelMapping,
    TASK_MAPPINGS,
    evaluate,
    map_prediction,
)
from .nli import CLASSES, ENTAILMENT


@dataclass(frozen=True)
class HypothesisTemplate:
    """One fixed hypothesis applied to every premise of a task run."""

    task: str
    hypothesis_text: str
    target_topic: str | None = None

    def __post_init__(self):
        if not self.hypothesis_text.strip():
            raise ValueError("hypothesis text must be non-empty")


# The shipped defaults are the Italian strings used for the review-analog
# demo; synthetic runs pass their own templates.
DEFAULT_TEMPLATES = {
    "sa": HypothesisTemplate("sa", "Sono soddisfatto"),
    "tr": HypothesisTemplate("tr", "Parlo di pulizia", target_topic="cleanliness"),
    "absa": HypothesisTemplate("absa", "La camera e pulita", target_topic="cleanliness"),
}


def gold_binary_label(example: AbsaExample, template: HypothesisTemplate) -> str:
    """Task gold in the mapping's binary label space."""
    mapping = TASK_MAPPINGS[template.task]
    positive_class, negative_class = mapping.classes
    if template.task == "sa":
        hit = example.sentiment == POSITIVE
    elif template.task == "tr":
        hit = example.topic == template.target_topic
    elif template.task == "absa":
        hit = example.topic == template.target_topic and example.sentiment == POSITIVE
    else:
        raise DataError(f"no gold rule for task {template.task!r}")
    return positive_class if hit else negative_class


def evaluate_nli(model, examples: Sequence[NliExample]) -> EvalReport:
    """Three-class evaluation of a model on gold NLI pairs."""
    if not examples:
        raise DataError("empty evaluation set")
    predictions = [
        model.predict_pair(e.premise, e.hypothesis).predicted_label for e in examples
    ]
    golds = [e.label for e in examples]
    return evaluate(predictions, golds, CLASSES)


def evaluate_rte(model, examples: Sequence[RteExample]) -> EvalReport:
    """Two-class RTE evaluation through the fixed RTE mapping."""
    if not examples:
        raise DataError("empty evaluation set")
    mapping = TASK_MAPPINGS["rte"]
    predictions = [
        map_prediction(model.predict_pair(e.premise, e.hypothesis), mapping)
        for e in examples
    ]
    golds = [e.label for e in examples]
    return evaluate(predictions, golds, RTE_CLASSES)


def zero_shot_task(
    model,
    dataset: Sequence[AbsaExample],
    template: HypothesisTemplate,
    mapping: LabelMapping | None = None,
) -> EvalReport:
    """Fixed-hypothesis zero-shot run over review records."""
    if not dataset:
        raise DataError("empty task dataset")
    mapping = mapping or TASK_MAPPINGS[template.task]
    if template.task in ("tr", "absa") and not template.target_topic:
        raise DataError(f"task {template.task} needs a target topic")
    predictions = []
    golds = []
    for example in dataset:
        prediction = model.predict_pair(example.text, template.hypothesis_text)
        predictions.append(map_prediction(prediction, mapping))
        golds.append(gold_binary_label(example, template))
    return evaluate(predictions, golds, mapping.classes)
