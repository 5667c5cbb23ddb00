"""Sentiment label scheme, predictions, and annotated-set handling."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Optional, Sequence

from ..errors import InputError
from ..textprep import CleanedDocument


class SentimentLabel(IntEnum):
    NEGATIVE = 0
    NEUTRAL = 1
    POSITIVE = 2


class BinaryLabel(IntEnum):
    NEGATIVE = 0
    NON_NEGATIVE = 1


TERNARY_CLASS_NAMES = ("negative", "neutral", "positive")
BINARY_CLASS_NAMES = ("negative", "non_negative")


def merge_to_binary(label: SentimentLabel) -> BinaryLabel:
    """Collapse neutral and positive into the non-negative category."""
    if label == SentimentLabel.NEGATIVE:
        return BinaryLabel.NEGATIVE
    return BinaryLabel.NON_NEGATIVE


@dataclass(frozen=True)
class Prediction:
    """One model output: a score triple and its argmax label.

    Ties resolve to the lower class index, so exact ties lean negative.
    """

    post_id: str
    scores: tuple[float, float, float]
    label: SentimentLabel

    @classmethod
    def from_scores(cls, post_id: str, scores: Sequence[float]) -> "Prediction":
        if len(scores) != 3:
            raise ValueError(f"expected 3 scores, got {len(scores)}")
        vals = [float(s) for s in scores]
        if any(v < 0 or v != v for v in vals):
            raise ValueError(f"scores must be non-negative: {vals}")
        total = sum(vals)
        if total <= 0:
            raise ValueError("scores sum to zero")
        vals = [v / total for v in vals]
        best = 0
        for i in (1, 2):
            if vals[i] > vals[best]:
                best = i
        return cls(post_id=post_id, scores=tuple(vals), label=SentimentLabel(best))

    @property
    def margin(self) -> float:
        top, second = sorted(self.scores, reverse=True)[:2]
        return top - second


def select_least_certain(predictions: Sequence[Prediction], k: int) -> list[str]:
    """Ids of the k lowest-margin predictions (re-annotation candidates)."""
    ranked = sorted(predictions, key=lambda p: (p.margin, p.post_id))
    return [p.post_id for p in ranked[:k]]


@dataclass
class AnnotatedSet:
    """Labeled documents plus per-class counts."""

    items: list[tuple[CleanedDocument, SentimentLabel]]

    def counts(self) -> dict[SentimentLabel, int]:
        out = {label: 0 for label in SentimentLabel}
        for _, label in self.items:
            out[label] += 1
        return out

    def __len__(self) -> int:
        return len(self.items)


def read_annotated_file(path: str | Path) -> AnnotatedSet:
    """Read the (id, text, label) interchange file; text is cleaned text."""
    path = Path(path)
    try:
        fh = open(path, encoding="utf-8", newline="")
    except OSError as exc:
        raise InputError(f"cannot read annotated file {path}: {exc}") from exc
    items: list[tuple[CleanedDocument, SentimentLabel]] = []
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"id", "text", "label"} <= set(reader.fieldnames):
            raise InputError(f"{path}: header must contain id, text, label")
        for row_no, row in enumerate(reader, start=2):
            try:
                label = SentimentLabel(int(row["label"]))
            except (TypeError, ValueError) as exc:
                raise InputError(f"{path}:{row_no}: label must be 0, 1 or 2") from exc
            tokens = tuple(row["text"].split())
            core = sum(len(t) for t in tokens)
            doc = CleanedDocument(
                post_id=row["id"],
                tokens=tokens,
                raw_length=len(row["text"]),
                clean_length=core + max(len(tokens) - 1, 0),
            )
            items.append((doc, label))
    return AnnotatedSet(items=items)


def write_annotated_file(
    path: str | Path,
    rows: Iterable[tuple[str, str, Optional[SentimentLabel]]],
) -> None:
    """Write (id, text, label) rows; label may be empty for blank samples."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "text", "label"])
        for post_id, text, label in rows:
            writer.writerow([post_id, text, "" if label is None else int(label)])
