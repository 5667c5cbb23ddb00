"""Classifier evaluation: confusion matrices, precision/recall/F1.

Every reported figure is recomputable from the confusion matrix alone,
which keeps independent verification one matrix away.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from ..errors import InputError
from .labels import (
    BINARY_CLASS_NAMES,
    TERNARY_CLASS_NAMES,
    Prediction,
    SentimentLabel,
    merge_to_binary,
)


def f1(precision: float, recall: float) -> float:
    """Harmonic mean of precision and recall; 0 when both are 0."""
    if not (0.0 <= precision <= 1.0) or not (0.0 <= recall <= 1.0):
        raise ValueError(f"precision and recall must lie in [0,1]: {precision}, {recall}")
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


@dataclass(frozen=True)
class MetricsReport:
    scheme: str
    class_names: tuple[str, ...]
    confusion: tuple[tuple[int, ...], ...]  # rows true, columns predicted
    precision: tuple[float, ...]
    recall: tuple[float, ...]
    f1_scores: tuple[float, ...]
    macro_f1: float

    def to_json_dict(self) -> dict:
        return {
            "scheme": self.scheme,
            "class_names": list(self.class_names),
            "confusion": [list(row) for row in self.confusion],
            "precision": list(self.precision),
            "recall": list(self.recall),
            "f1": list(self.f1_scores),
            "macro_f1": self.macro_f1,
        }


def metrics_from_confusion(
    confusion: Sequence[Sequence[int]], class_names: Sequence[str], scheme: str
) -> MetricsReport:
    k = len(class_names)
    precision = []
    recall = []
    f1s = []
    for c in range(k):
        col = sum(confusion[t][c] for t in range(k))
        row = sum(confusion[c])
        tp = confusion[c][c]
        p = tp / col if col else 0.0
        r = tp / row if row else 0.0
        precision.append(p)
        recall.append(r)
        f1s.append(f1(p, r))
    return MetricsReport(
        scheme=scheme,
        class_names=tuple(class_names),
        confusion=tuple(tuple(row) for row in confusion),
        precision=tuple(precision),
        recall=tuple(recall),
        f1_scores=tuple(f1s),
        macro_f1=sum(f1s) / k,
    )


def evaluate(
    predictions: Sequence[Prediction],
    gold: Mapping[str, SentimentLabel],
    scheme: str = "ternary",
) -> MetricsReport:
    """Score predictions against gold labels under a label scheme.

    The binary scheme applies the ternary-to-binary merge to both sides
    before counting.
    """
    if scheme not in ("ternary", "binary"):
        raise ValueError(f"unknown scheme {scheme!r}")
    pred_ids = {p.post_id for p in predictions}
    if pred_ids != set(gold) or len(pred_ids) != len(predictions):
        raise InputError("prediction and gold id sets differ")
    if scheme == "ternary":
        names = TERNARY_CLASS_NAMES
        project = int
    else:
        names = BINARY_CLASS_NAMES
        project = lambda label: int(merge_to_binary(label))  # noqa: E731
    k = len(names)
    confusion = [[0] * k for _ in range(k)]
    for pred in predictions:
        t = project(gold[pred.post_id])
        p = project(pred.label)
        confusion[t][p] += 1
    return metrics_from_confusion(confusion, names, scheme)
