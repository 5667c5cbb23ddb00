"""Evaluation reports, emitted in the pipeline's metrics JSON shape."""

from __future__ import annotations

TERNARY_NAMES = ("negative", "neutral", "positive")
BINARY_NAMES = ("negative", "non_negative")


def _report_from_confusion(confusion: list[list[int]], names: tuple[str, ...], scheme: str) -> dict:
    k = len(names)
    precision, recall, f1 = [], [], []
    for c in range(k):
        col = sum(confusion[t][c] for t in range(k))
        row = sum(confusion[c])
        tp = confusion[c][c]
        p = tp / col if col else 0.0
        r = tp / row if row else 0.0
        precision.append(p)
        recall.append(r)
        f1.append(2 * p * r / (p + r) if p + r else 0.0)
    return {
        "scheme": scheme,
        "class_names": list(names),
        "confusion": confusion,
        "precision": precision,
        "recall": recall,
        "f1": f1,
        "macro_f1": sum(f1) / k,
    }


def evaluation_report(true_labels: list[int], predicted: list[int], scheme: str) -> dict:
    """Confusion-matrix metrics; binary merges neutral/positive first."""
    if scheme == "binary":
        project = lambda label: 0 if label == 0 else 1  # noqa: E731
        names = BINARY_NAMES
    else:
        project = lambda label: label  # noqa: E731
        names = TERNARY_NAMES
    k = len(names)
    confusion = [[0] * k for _ in range(k)]
    for t, p in zip(true_labels, predicted):
        confusion[project(t)][project(p)] += 1
    return _report_from_confusion(confusion, names, scheme)
