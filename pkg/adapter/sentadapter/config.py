"""Adapter configuration."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path

N_LABELS = 3  # negative / neutral / positive, fixed by the label scheme

# documented full-scale choice; tests use the built-in tiny model instead
NORWEGIAN_BASE_MODEL = "ltg/norbert"
TINY_BASE_MODEL = "tiny-random"


@dataclass
class AdapterConfig:
    base_model: str = TINY_BASE_MODEL
    epochs: int = 30
    learning_rate: float = 5e-3
    batch_size: int = 16
    seed: int = 0
    max_length: int = 32
    heldout_fraction: float = 0.2

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps(asdict(self), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "AdapterConfig":
        return cls(**json.loads(Path(path).read_text(encoding="utf-8")))
