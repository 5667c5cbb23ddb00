"""Model construction: pretrained checkpoints or a built-in tiny model.

The tiny path assembles a fresh two-layer BERT over a word-level
vocabulary harvested from the training texts, so tests and CI never
download weights; any Hugging Face checkpoint id (e.g. a Norwegian
BERT) slots in through the same interface for real use.
"""

from __future__ import annotations

from collections import Counter
from pathlib import Path
from typing import Iterable

import torch
import transformers
from transformers import (
    AutoModelForSequenceClassification,
    AutoTokenizer,
    BertConfig,
    BertForSequenceClassification,
    BertTokenizer,
)

from .config import N_LABELS, TINY_BASE_MODEL, AdapterConfig

transformers.logging.set_verbosity_error()

SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
TINY_VOCAB_CAP = 4000


def _build_tiny(texts: Iterable[str], work_dir: Path):
    counts = Counter()
    for text in texts:
        counts.update(text.lower().split())
    words = sorted(counts, key=lambda w: (-counts[w], w))[:TINY_VOCAB_CAP]
    vocab_file = work_dir / "vocab.txt"
    vocab_file.write_text("\n".join(SPECIALS + words) + "\n", encoding="utf-8")
    tokenizer = BertTokenizer(str(vocab_file), do_lower_case=True)
    config = BertConfig(
        vocab_size=len(SPECIALS) + len(words),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=64,
        num_labels=N_LABELS,
    )
    model = BertForSequenceClassification(config)
    return tokenizer, model


def build_model(config: AdapterConfig, texts: list[str], work_dir: Path):
    torch.manual_seed(config.seed)
    if config.base_model == TINY_BASE_MODEL:
        return _build_tiny(texts, work_dir)
    tokenizer = AutoTokenizer.from_pretrained(config.base_model)
    model = AutoModelForSequenceClassification.from_pretrained(
        config.base_model, num_labels=N_LABELS
    )
    return tokenizer, model


def load_artifact(artifact_dir: str | Path):
    artifact_dir = Path(artifact_dir)
    tokenizer = AutoTokenizer.from_pretrained(artifact_dir)
    model = AutoModelForSequenceClassification.from_pretrained(artifact_dir)
    model.eval()
    config = AdapterConfig.load(artifact_dir / "adapter_config.json")
    return tokenizer, model, config


@torch.no_grad()
def score_texts(
    tokenizer, model, texts: list[str], max_length: int, batch_size: int = 32
) -> list[list[float]]:
    """Probability triples for each text, renormalized in float64."""
    out: list[list[float]] = []
    for start in range(0, len(texts), batch_size):
        batch = texts[start : start + batch_size]
        enc = tokenizer(
            batch, padding=True, truncation=True, max_length=max_length, return_tensors="pt"
        )
        logits = model(**enc).logits.to(torch.float64)
        probs = torch.softmax(logits, dim=-1)
        probs = probs / probs.sum(dim=-1, keepdim=True)
        out.extend(row.tolist() for row in probs)
    return out
