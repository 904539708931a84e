"""Accuracy, per-class F1, Min F1, Macro-Avg F1, and the two-label mappings.

Per-class scores are computed in exact rational arithmetic and only
converted to float at the report boundary. The 0/0 convention is F1 = 0:
a class absent from both predictions and golds scores zero and still
counts in the macro average, which keeps Min F1 meaningful on heavily
imbalanced runs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .data import NO_ENTAILMENT
from .errors import DataError
from .nli import CLASSES, CONTRADICTION, ENTAILMENT, NEUTRAL, NliPrediction


@dataclass(frozen=True)
class EvalReport:
    """Metric bundle for one evaluation run; rows of the confusion matrix
    are gold classes, columns are predictions."""

    accuracy: float
    per_class_f1: dict[str, float]
    min_f1: float
    macro_avg_f1: float
    confusion_matrix: np.ndarray
    classes: tuple[str, ...]
    num_examples: int


def confusion(predictions: Sequence[str], golds: Sequence[str], classes: Sequence[str]) -> np.ndarray:
    index = {label: i for i, label in enumerate(classes)}
    matrix = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for predicted, gold in zip(predictions, golds):
        matrix[index[gold], index[predicted]] += 1
    return matrix


def report_from_confusion(matrix: np.ndarray, classes: Sequence[str]) -> EvalReport:
    """Derive every metric from a confusion matrix with Fraction arithmetic."""
    matrix = np.asarray(matrix, dtype=np.int64)
    total = int(matrix.sum())
    if total == 0:
        raise DataError("empty confusion matrix")
    accuracy = Fraction(int(np.trace(matrix)), total)
    per_class: dict[str, Fraction] = {}
    for i, label in enumerate(classes):
        tp = int(matrix[i, i])
        fp = int(matrix[:, i].sum()) - tp
        fn = int(matrix[i, :].sum()) - tp
        precision = Fraction(tp, tp + fp) if tp + fp else Fraction(0)
        recall = Fraction(tp, tp + fn) if tp + fn else Fraction(0)
        if precision + recall:
            f1 = 2 * precision * recall / (precision + recall)
        else:
            f1 = Fraction(0)
        per_class[label] = f1
    macro = sum(per_class.values()) / len(classes)
    return EvalReport(
        accuracy=float(accuracy),
        per_class_f1={label: float(f1) for label, f1 in per_class.items()},
        min_f1=float(min(per_class.values())),
        macro_avg_f1=float(macro),
        confusion_matrix=matrix,
        classes=tuple(classes),
        num_examples=total,
    )


def evaluate(predictions: Sequence[str], golds: Sequence[str], classes: Sequence[str]) -> EvalReport:
    if len(predictions) != len(golds):
        raise DataError(
            f"{len(predictions)} predictions vs {len(golds)} golds"
        )
    if not predictions:
        raise DataError("nothing to evaluate")
    class_set = set(classes)
    for label in list(predictions) + list(golds):
        if label not in class_set:
            raise DataError(f"label {label!r} outside class set {sorted(class_set)}")
    return report_from_confusion(confusion(predictions, golds, classes), classes)


def format_report(report: EvalReport, task: str = "") -> str:
    """Human-readable multi-line report."""
    lines = []
    if task:
        lines.append(f"task: {task}")
    lines.append(f"examples: {report.num_examples}")
    lines.append(f"accuracy: {report.accuracy:.4f}")
    lines.append(f"min F1: {report.min_f1:.4f}")
    lines.append(f"macro-avg F1: {report.macro_avg_f1:.4f}")
    for label in report.classes:
        lines.append(f"F1[{label}]: {report.per_class_f1[label]:.4f}")
    lines.append("confusion (rows gold, cols predicted):")
    header = " ".join(f"{label:>14}" for label in report.classes)
    lines.append(f"{'':>14} {header}")
    for i, label in enumerate(report.classes):
        row = " ".join(f"{int(v):>14}" for v in report.confusion_matrix[i])
        lines.append(f"{label:>14} {row}")
    return "\n".join(lines)


def report_record(task: str, report: EvalReport) -> str:
    """Machine-readable single-line record of a run."""
    per_class = ",".join(
        f"{label}={report.per_class_f1[label]!r}" for label in report.classes
    )
    return (
        f"{task}\t{report.num_examples}\t{report.accuracy!r}\t{report.min_f1!r}"
        f"\t{report.macro_avg_f1!r}\t{per_class}"
    )


# ---------------------------------------------------------------------------
# two-label task mappings


@dataclass(frozen=True)
class LabelMapping:
    """How the three NLI classes collapse to one task's binary labels."""

    task: str
    neutral_maps_to: str
    contradiction_maps_to: str

    def apply(self, label: str) -> str:
        if label == ENTAILMENT:
            return ENTAILMENT
        if label == NEUTRAL:
            return self.neutral_maps_to
        if label == CONTRADICTION:
            return self.contradiction_maps_to
        raise DataError(f"unknown NLI label {label!r}")

    @property
    def classes(self) -> tuple[str, str]:
        negatives = {self.neutral_maps_to, self.contradiction_maps_to} - {ENTAILMENT}
        if len(negatives) != 1:
            raise DataError(f"mapping for {self.task} does not produce a binary split")
        return (ENTAILMENT, negatives.pop())


TASK_MAPPINGS = {
    "rte": LabelMapping("rte", NO_ENTAILMENT, NO_ENTAILMENT),
    "sa": LabelMapping("sa", ENTAILMENT, CONTRADICTION),
    "tr": LabelMapping("tr", ENTAILMENT, CONTRADICTION),
    "absa": LabelMapping("absa", CONTRADICTION, CONTRADICTION),
}


def map_prediction(prediction: NliPrediction, mapping: LabelMapping) -> str:
    """Collapse an argmax 3-class prediction through the task's table."""
    return mapping.apply(prediction.predicted_label)


def all_mapping_variants(task: str) -> list[LabelMapping]:
    """Every way to collapse Neutral/Contradiction for comparison runs."""
    if task == "rte":
        targets = (ENTAILMENT, NO_ENTAILMENT)
    else:
        targets = (ENTAILMENT, CONTRADICTION)
    variants = []
    for neutral_to in targets:
        for contradiction_to in targets:
            if {neutral_to, contradiction_to} - {ENTAILMENT}:
                variants.append(LabelMapping(task, neutral_to, contradiction_to))
    return variants
