"""Annotated-set interchange file handling (id, text, label)."""

from __future__ import annotations

import csv
import random
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class AnnotatedRow:
    row_id: str
    text: str
    label: int


def read_annotated(path: str | Path) -> list[AnnotatedRow]:
    """Read the interchange CSV; labels outside {0,1,2} are fatal."""
    path = Path(path)
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"id", "text", "label"} <= set(reader.fieldnames):
            raise ValueError(f"{path}: header must contain id, text, label")
        rows = []
        for row_no, row in enumerate(reader, start=2):
            try:
                label = int(row["label"])
            except (TypeError, ValueError) as exc:
                raise ValueError(f"{path}:{row_no}: label is not an integer") from exc
            if label not in (0, 1, 2):
                raise ValueError(f"{path}:{row_no}: label {label} outside 0..2")
            rows.append(AnnotatedRow(row["id"], row["text"], label))
    if not rows:
        raise ValueError(f"{path}: training file holds no rows")
    return rows


def stratified_split(
    rows: list[AnnotatedRow], heldout_fraction: float, seed: int
) -> tuple[list[AnnotatedRow], list[AnnotatedRow]]:
    by_label: dict[int, list[int]] = {}
    for idx, row in enumerate(rows):
        by_label.setdefault(row.label, []).append(idx)
    rng = random.Random(seed)
    heldout: set[int] = set()
    for label in sorted(by_label):
        idxs = by_label[label][:]
        rng.shuffle(idxs)
        heldout.update(idxs[: int(round(heldout_fraction * len(idxs)))])
    train = [row for i, row in enumerate(rows) if i not in heldout]
    held = [row for i, row in enumerate(rows) if i in heldout]
    return train, held
