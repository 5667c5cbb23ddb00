"""Shared fixtures: a small separable training file and one trained artifact."""

from __future__ import annotations

import csv
import random
from pathlib import Path

import pytest

from sentadapter.config import AdapterConfig
from sentadapter.finetune import finetune

CLASS_WORDS = {
    0: ["ødelegger", "rasering", "skandale", "naturtap", "protest"],
    1: ["konsesjon", "høring", "rapport", "utbygging", "møte"],
    2: ["fantastisk", "grønn", "fornybar", "framtid", "glimrende"],
}
FILLER = ["saken", "kommunen", "fjellet", "landet", "debatten", "kysten"]


def write_training_file(path: Path, n_rows: int, seed: int) -> None:
    rng = random.Random(seed)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "text", "label"])
        for i in range(n_rows):
            label = i % 3
            words = rng.sample(CLASS_WORDS[label], 2) + rng.sample(FILLER, 2)
            rng.shuffle(words)
            writer.writerow([f"t{i:04d}", " ".join(words), label])


@pytest.fixture(scope="session")
def trained_artifact(tmp_path_factory) -> Path:
    base = tmp_path_factory.mktemp("artifact")
    train_file = base / "train.csv"
    write_training_file(train_file, 150, seed=3)
    out = base / "model"
    finetune(train_file, out, AdapterConfig(epochs=30, seed=0))
    return out
