"""Binary salience classifier: training, evaluation, document compression.

Two backends satisfy the same contract: a deterministic bag-of-words
reference model trained by gradient descent (used by every test), and a
pretrained-encoder backend in :mod:`salientsum.integration` for real runs.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from .corpus import Sentence
from .salience import SalienceExample

_WORD = re.compile(r"[a-z0-9']+")

SALIENT, NON_SALIENT = "salient", "non_salient"


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 5
    learning_rate: float = 2e-5  # encoder default; the reference backend has its own step size
    max_grad_norm: float = 1.0
    warmup_proportion: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")


@dataclass(frozen=True)
class CompressedDocument:
    """Ordered subset of source sentences surviving salience filtering."""

    doc_id: str
    kept: tuple[Sentence, ...]
    kept_ids: tuple[int, ...]
    text: str


@runtime_checkable
class ClassifierBackend(Protocol):
    name: str

    def fit(self, train: Sequence[tuple[str, int]], config: TrainConfig,
            dev: Sequence[tuple[str, int]] | None = None):
        ...

    def predict_proba(self, model, text: str) -> float:
        ...


def _tokenize(text: str) -> list[str]:
    return _WORD.findall(text.lower())


@dataclass
class BagOfWordsModel:
    """Linear decision rule over binary bag-of-words features."""

    vocab: dict[str, int]
    weights: np.ndarray
    bias: float
    dev_accuracy_per_epoch: list[float] = field(default_factory=list)

    def predict_proba(self, text: str) -> float:
        z = self.bias
        seen = set()
        for word in _tokenize(text):
            index = self.vocab.get(word)
            if index is not None and index not in seen:
                seen.add(index)
                z += self.weights[index]
        return float(1.0 / (1.0 + math.exp(-z)))


class BagOfWordsBackend:
    """Reference classifier: logistic regression trained by full-batch
    gradient descent from a zero initialization, so a fixed seed (or any
    seed) reproduces identical parameters bit for bit."""

    name = "bow"

    def __init__(self, step_size: float = 1.0, steps_per_epoch: int = 200,
                 l2: float = 1e-4):
        self.step_size = step_size
        self.steps_per_epoch = steps_per_epoch
        self.l2 = l2

    def _features(self, texts: Sequence[str], vocab: dict[str, int]) -> np.ndarray:
        x = np.zeros((len(texts), len(vocab)))
        for row, text in enumerate(texts):
            for word in _tokenize(text):
                index = vocab.get(word)
                if index is not None:
                    x[row, index] = 1.0
        return x

    def fit(self, train: Sequence[tuple[str, int]], config: TrainConfig,
            dev: Sequence[tuple[str, int]] | None = None) -> BagOfWordsModel:
        texts = [t for t, _ in train]
        y = np.array([label for _, label in train], dtype=float)
        vocab: dict[str, int] = {}
        for text in texts:
            for word in _tokenize(text):
                if word not in vocab:
                    vocab[word] = len(vocab)
        x = self._features(texts, vocab)
        w = np.zeros(len(vocab))
        b = 0.0
        model = BagOfWordsModel(vocab=vocab, weights=w, bias=b)
        for _ in range(config.epochs):
            for _ in range(self.steps_per_epoch):
                p = 1.0 / (1.0 + np.exp(-(x @ w + b)))
                error = p - y
                w -= self.step_size * (x.T @ error / len(y) + self.l2 * w)
                b -= self.step_size * float(error.mean())
            model.weights, model.bias = w, b
            if dev is not None:
                correct = sum(
                    (model.predict_proba(text) >= 0.5) == bool(label)
                    for text, label in dev
                )
                model.dev_accuracy_per_epoch.append(correct / len(dev))
        return model

    def predict_proba(self, model: BagOfWordsModel, text: str) -> float:
        return model.predict_proba(text)


def _as_examples(dataset: Sequence[SalienceExample]) -> list[tuple[str, int]]:
    return [(ex.text, 1 if ex.label == SALIENT else 0) for ex in dataset]


def train(backend: ClassifierBackend, dataset_train: Sequence[SalienceExample],
          dataset_dev: Sequence[SalienceExample], config: TrainConfig):
    """Fit the backend on the training examples; dev accuracy is recorded
    per epoch on the returned model handle."""
    if not dataset_train:
        raise ValueError("empty training set")
    labels = {ex.label for ex in dataset_train}
    if labels != {SALIENT, NON_SALIENT}:
        raise ValueError(f"training set must contain both labels, got {sorted(labels)}")
    return backend.fit(_as_examples(dataset_train), config, dev=_as_examples(dataset_dev))


def evaluate_accuracy(model, dataset_test: Sequence[SalienceExample]) -> float:
    """Fraction of test examples classified correctly at threshold 0.5."""
    if not dataset_test:
        raise ValueError("empty test set")
    correct = sum(
        (model.predict_proba(ex.text) >= 0.5) == (ex.label == SALIENT)
        for ex in dataset_test
    )
    return correct / len(dataset_test)


def compress_document(model, document: Sequence[Sentence],
                      threshold: float = 0.5, doc_id: str = "") -> CompressedDocument:
    """Keep sentences whose salience probability clears the threshold,
    preserving document order.

    If nothing clears it, the top max(1, ceil(0.1 * m)) sentences by
    probability are kept instead; the abstractor cannot take an empty
    document.
    """
    if not document:
        raise ValueError("empty document")
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1)")
    probabilities = [model.predict_proba(s.text) for s in document]
    kept_ids = [s.sent_id for s, p in zip(document, probabilities) if p >= threshold]
    if not kept_ids:
        fallback = max(1, math.ceil(0.1 * len(document)))
        by_probability = sorted(
            range(len(document)), key=lambda i: (-probabilities[i], document[i].sent_id)
        )
        kept_ids = sorted(document[i].sent_id for i in by_probability[:fallback])
    by_id = {s.sent_id: s for s in document}
    kept = tuple(by_id[i] for i in kept_ids)
    return CompressedDocument(
        doc_id=doc_id,
        kept=kept,
        kept_ids=tuple(kept_ids),
        text=" ".join(s.text for s in kept),
    )


def compression_ratio(document: Sequence[Sentence], compressed: CompressedDocument) -> float:
    """Fraction of the document's words removed by compression."""
    if not document:
        raise ValueError("empty document")
    total = sum(s.word_count for s in document)
    kept = len(compressed.text.split())
    return 1.0 - kept / total


# --- model persistence -------------------------------------------------------


def save_model(model: BagOfWordsModel, directory: str | Path,
               config: TrainConfig, metrics: dict | None = None) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    with open(directory / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump({
            "backend": "bow",
            "config": {
                "epochs": config.epochs,
                "learning_rate": config.learning_rate,
                "max_grad_norm": config.max_grad_norm,
                "warmup_proportion": config.warmup_proportion,
            },
            "seed": config.seed,
            "metrics": metrics or {},
        }, fh, indent=2, sort_keys=True)
    with open(directory / "weights.json", "w", encoding="utf-8") as fh:
        json.dump({
            "vocab": model.vocab,
            "weights": model.weights.tolist(),
            "bias": model.bias,
            "dev_accuracy_per_epoch": model.dev_accuracy_per_epoch,
        }, fh, sort_keys=True)


def load_model(directory: str | Path) -> BagOfWordsModel:
    directory = Path(directory)
    with open(directory / "manifest.json", encoding="utf-8") as fh:
        manifest = json.load(fh)
    if manifest["backend"] != "bow":
        raise ValueError(f"cannot load backend {manifest['backend']!r} here; "
                         "encoder models load through salientsum.integration")
    with open(directory / "weights.json", encoding="utf-8") as fh:
        data = json.load(fh)
    return BagOfWordsModel(
        vocab=data["vocab"],
        weights=np.array(data["weights"]),
        bias=data["bias"],
        dev_accuracy_per_epoch=data.get("dev_accuracy_per_epoch", []),
    )


def predict_sentences(model, jsonl_in: str | Path, jsonl_out: str | Path,
                      threshold: float = 0.5) -> int:
    """Score a sentence file in the salience-dataset JSONL format; writes
    one {doc_id, sent_id, probability, predicted} object per line."""
    count = 0
    with open(jsonl_in, encoding="utf-8") as src, open(jsonl_out, "w", encoding="utf-8") as dst:
        for line in src:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            probability = model.predict_proba(rec["text"])
            dst.write(json.dumps({
                "doc_id": rec["doc_id"],
                "sent_id": rec["sent_id"],
                "probability": probability,
                "predicted": SALIENT if probability >= threshold else NON_SALIENT,
            }, sort_keys=True) + "\n")
            count += 1
    return count
