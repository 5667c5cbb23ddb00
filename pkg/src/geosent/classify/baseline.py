"""Deterministic linear baseline over hashed token n-grams.

Stands in for an external fine-tuned model wherever one is not
available: multinomial logistic regression on hashed unigram/bigram
counts, fit with L-BFGS to a fixed tolerance. Same input, config, and
seed give bit-identical artifacts.
"""

from __future__ import annotations

import base64
import hashlib
import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from ..textprep import CleanedDocument
from .labels import AnnotatedSet, Prediction, SentimentLabel

N_CLASSES = 3


@dataclass(frozen=True)
class BaselineConfig:
    hash_dim: int = 4096
    seed: int = 13
    l2: float = 1e-3
    ngram_max: int = 2
    max_iter: int = 500
    tol: float = 1e-8  # L-BFGS projected-gradient tolerance


def _ngrams(tokens: Sequence[str], ngram_max: int) -> list[str]:
    grams = list(tokens)
    for n in range(2, ngram_max + 1):
        grams.extend(" ".join(tokens[i : i + n]) for i in range(len(tokens) - n + 1))
    return grams


def _hash_feature(gram: str, seed: int) -> int:
    data = f"{seed}\x1f{gram}".encode("utf-8")
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


def featurize(docs: Sequence[CleanedDocument], config: BaselineConfig) -> np.ndarray:
    """Signed hashed n-gram counts, L2-normalized per document."""
    X = np.zeros((len(docs), config.hash_dim), dtype=np.float64)
    for i, doc in enumerate(docs):
        for gram in _ngrams(doc.tokens, config.ngram_max):
            h = _hash_feature(gram, config.seed)
            sign = 1.0 if (h >> 63) & 1 == 0 else -1.0
            X[i, h % config.hash_dim] += sign
        norm = np.linalg.norm(X[i])
        if norm > 0:
            X[i] /= norm
    return X


def _loss_and_grad(params, X, Y, l2, dim):
    n = X.shape[0]
    W = params[: N_CLASSES * dim].reshape(N_CLASSES, dim)
    b = params[N_CLASSES * dim :]
    Z = X @ W.T + b
    Z -= Z.max(axis=1, keepdims=True)
    expz = np.exp(Z)
    P = expz / expz.sum(axis=1, keepdims=True)
    loss = -np.log(np.clip((P * Y).sum(axis=1), 1e-300, None)).mean()
    loss += 0.5 * l2 * float((W * W).sum())
    G = (P - Y) / n
    gW = G.T @ X + l2 * W
    gb = G.sum(axis=0)
    return loss, np.concatenate([gW.ravel(), gb])


class BaselineModel:
    def __init__(self, weights: np.ndarray, bias: np.ndarray, config: BaselineConfig):
        self.weights = weights
        self.bias = bias
        self.config = config

    def score_documents(self, docs: Sequence[CleanedDocument]) -> list[Prediction]:
        if not docs:
            return []
        X = featurize(docs, self.config)
        Z = X @ self.weights.T + self.bias
        Z -= Z.max(axis=1, keepdims=True)
        expz = np.exp(Z)
        P = expz / expz.sum(axis=1, keepdims=True)
        return [
            Prediction.from_scores(doc.post_id, row) for doc, row in zip(docs, P)
        ]

    def save(self, path: str | Path) -> None:
        payload = {
            "hash_dim": self.config.hash_dim,
            "seed": self.config.seed,
            "l2": self.config.l2,
            "ngram_max": self.config.ngram_max,
            "max_iter": self.config.max_iter,
            "tol": self.config.tol,
            "weights": base64.b64encode(np.ascontiguousarray(self.weights).tobytes()).decode(),
            "bias": base64.b64encode(np.ascontiguousarray(self.bias).tobytes()).decode(),
        }
        Path(path).write_text(
            json.dumps(payload, sort_keys=True, indent=1) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "BaselineModel":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        config = BaselineConfig(
            hash_dim=payload["hash_dim"],
            seed=payload["seed"],
            l2=payload["l2"],
            ngram_max=payload["ngram_max"],
            max_iter=payload["max_iter"],
            tol=payload["tol"],
        )
        weights = np.frombuffer(
            base64.b64decode(payload["weights"]), dtype=np.float64
        ).reshape(N_CLASSES, config.hash_dim)
        bias = np.frombuffer(base64.b64decode(payload["bias"]), dtype=np.float64)
        return cls(weights, bias, config)


def train_baseline(train: AnnotatedSet, config: BaselineConfig = BaselineConfig()) -> BaselineModel:
    """Fit the baseline; fails fast on degenerate (single-class) data."""
    if len({label for _, label in train.items}) < 2:
        raise ValueError("degenerate training data: fewer than two classes present")
    docs = [doc for doc, _ in train.items]
    X = featurize(docs, config)
    Y = np.zeros((len(docs), N_CLASSES), dtype=np.float64)
    for i, (_, label) in enumerate(train.items):
        Y[i, int(label)] = 1.0
    x0 = np.zeros(N_CLASSES * config.hash_dim + N_CLASSES)
    result = minimize(
        _loss_and_grad,
        x0,
        args=(X, Y, config.l2, config.hash_dim),
        method="L-BFGS-B",
        jac=True,
        options={"maxiter": config.max_iter, "gtol": config.tol, "ftol": 1e-14},
    )
    W = result.x[: N_CLASSES * config.hash_dim].reshape(N_CLASSES, config.hash_dim)
    b = result.x[N_CLASSES * config.hash_dim :]
    return BaselineModel(W.copy(), b.copy(), config)


def stratified_split(
    annotated: AnnotatedSet, test_fraction: float, seed: int
) -> tuple[AnnotatedSet, AnnotatedSet]:
    """Per-class random split with a fixed seed; test gets the fraction."""
    rng = random.Random(seed)
    by_class: dict[SentimentLabel, list[int]] = {}
    for idx, (_, label) in enumerate(annotated.items):
        by_class.setdefault(label, []).append(idx)
    test_idx: set[int] = set()
    for label in sorted(by_class):
        idxs = by_class[label][:]
        rng.shuffle(idxs)
        n_test = int(round(test_fraction * len(idxs)))
        test_idx.update(idxs[:n_test])
    train_items = [item for i, item in enumerate(annotated.items) if i not in test_idx]
    test_items = [item for i, item in enumerate(annotated.items) if i in test_idx]
    return AnnotatedSet(train_items), AnnotatedSet(test_items)
