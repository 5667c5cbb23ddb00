"""Fine-tuning: seeded training loop plus held-out evaluation."""

from __future__ import annotations

import json
import logging
import random
from pathlib import Path

import torch

from .config import AdapterConfig
from .data import AnnotatedRow, read_annotated, stratified_split
from .metrics import evaluation_report
from .modeling import build_model, score_texts

log = logging.getLogger(__name__)


def _predict_labels(tokenizer, model, rows: list[AnnotatedRow], config: AdapterConfig) -> list[int]:
    scores = score_texts(tokenizer, model, [r.text for r in rows], config.max_length)
    labels = []
    for triple in scores:
        best = 0
        for i in (1, 2):
            if triple[i] > triple[best]:
                best = i
        labels.append(best)
    return labels


def finetune(train_path: str | Path, out_dir: str | Path, config: AdapterConfig) -> dict:
    """Train on the interchange file, save the artifact, return metrics."""
    rows = read_annotated(train_path)
    train_rows, heldout_rows = stratified_split(rows, config.heldout_fraction, config.seed)
    if len({r.label for r in train_rows}) < 2:
        raise ValueError("training data holds fewer than two classes")

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(config.seed)
    torch.set_num_threads(1)
    tokenizer, model = build_model(config, [r.text for r in train_rows], out_dir)

    enc = tokenizer(
        [r.text for r in train_rows],
        padding=True,
        truncation=True,
        max_length=config.max_length,
        return_tensors="pt",
    )
    labels = torch.tensor([r.label for r in train_rows])
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)
    order_rng = random.Random(config.seed)
    n = len(train_rows)

    model.train()
    for epoch in range(config.epochs):
        indices = list(range(n))
        order_rng.shuffle(indices)
        total_loss = 0.0
        for start in range(0, n, config.batch_size):
            batch = indices[start : start + config.batch_size]
            optimizer.zero_grad()
            output = model(
                input_ids=enc["input_ids"][batch],
                attention_mask=enc["attention_mask"][batch],
                labels=labels[batch],
            )
            output.loss.backward()
            optimizer.step()
            total_loss += float(output.loss.detach())
        log.debug("epoch %d loss %.4f", epoch, total_loss)

    model.eval()
    payload: dict = {
        "train_counts": {
            str(label): sum(1 for r in train_rows if r.label == label) for label in (0, 1, 2)
        },
        "split": {"seed": config.seed, "test_fraction": config.heldout_fraction},
        "ternary": None,
        "binary": None,
    }
    if heldout_rows:
        predicted = _predict_labels(tokenizer, model, heldout_rows, config)
        true = [r.label for r in heldout_rows]
        payload["ternary"] = evaluation_report(true, predicted, "ternary")
        payload["binary"] = evaluation_report(true, predicted, "binary")

    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    config.save(out_dir / "adapter_config.json")
    (out_dir / "metrics.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return payload
