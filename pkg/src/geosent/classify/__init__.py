"""Sentiment classification: labels, metrics, baseline model, adapter client."""

from __future__ import annotations

import random
from typing import Sequence

from ..textprep import CleanedDocument
from .adapter import AdapterClient, StdioTransport, TcpTransport, transport_from_config
from .baseline import BaselineConfig, BaselineModel, stratified_split, train_baseline
from .labels import (
    BINARY_CLASS_NAMES,
    TERNARY_CLASS_NAMES,
    AnnotatedSet,
    BinaryLabel,
    Prediction,
    SentimentLabel,
    merge_to_binary,
    read_annotated_file,
    select_least_certain,
    write_annotated_file,
)
from .metrics import MetricsReport, evaluate, f1, metrics_from_confusion


def classify_corpus(backend, documents: Sequence[CleanedDocument]) -> list[Prediction]:
    """Score documents with any backend exposing score_documents().

    Output is order-stable by post_id regardless of backend response
    order.
    """
    if not documents:
        return []
    predictions = backend.score_documents(list(documents))
    got = {p.post_id for p in predictions}
    want = {d.post_id for d in documents}
    if got != want or len(predictions) != len(documents):
        raise ValueError("backend did not return exactly one prediction per document")
    return sorted(predictions, key=lambda p: p.post_id)


def sample_random(documents: Sequence[CleanedDocument], k: int, seed: int) -> list[str]:
    """Ids of k documents drawn without replacement, seed-determined."""
    rng = random.Random(seed)
    ids = sorted(d.post_id for d in documents)
    rng.shuffle(ids)
    return sorted(ids[:k])


__all__ = [
    "AdapterClient",
    "AnnotatedSet",
    "BaselineConfig",
    "BaselineModel",
    "BinaryLabel",
    "BINARY_CLASS_NAMES",
    "MetricsReport",
    "Prediction",
    "SentimentLabel",
    "StdioTransport",
    "TcpTransport",
    "TERNARY_CLASS_NAMES",
    "classify_corpus",
    "evaluate",
    "f1",
    "merge_to_binary",
    "metrics_from_confusion",
    "read_annotated_file",
    "sample_random",
    "select_least_certain",
    "stratified_split",
    "train_baseline",
    "transport_from_config",
    "write_annotated_file",
]
