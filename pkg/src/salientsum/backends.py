"""Deterministic mock backends for tests and offline pipeline runs.

Every mock tokenizes on whitespace, is a pure function of its inputs, and
counts how often it is called so cache behaviour can be asserted. Real
pretrained backends live in :mod:`salientsum.integration`.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field


@dataclass
class UniformLikelihoodBackend:
    """Assigns the same probability to every target token."""

    p: float = 0.25
    max_context_tokens: int = 4096
    calls: int = 0

    @property
    def fingerprint(self) -> str:
        return f"mock-uniform-lm/p={self.p}/whitespace"

    def count_tokens(self, text: str) -> int:
        return len(text.split())

    def token_logprobs(self, context: str, target: str) -> list[float]:
        self.calls += 1
        return [math.log(self.p)] * len(target.split())


@dataclass
class OverlapLikelihoodBackend:
    """Target tokens that appear in the context get probability ``p_known``,
    the rest ``p_novel``. A cheap stand-in for the intuition that grounded
    text is easier to predict."""

    p_known: float = 0.5
    p_novel: float = 0.05
    max_context_tokens: int = 4096
    calls: int = 0

    @property
    def fingerprint(self) -> str:
        return f"mock-overlap-lm/known={self.p_known}/novel={self.p_novel}/whitespace"

    def count_tokens(self, text: str) -> int:
        return len(text.split())

    def token_logprobs(self, context: str, target: str) -> list[float]:
        self.calls += 1
        context_words = {w.lower() for w in context.split()}
        return [
            math.log(self.p_known if w.lower() in context_words else self.p_novel)
            for w in target.split()
        ]


@dataclass
class ConstantEntailmentBackend:
    """Returns the same probability for every pair; handy for range checks."""

    value: float = 0.5
    calls: int = 0
    fingerprint: str = "mock-entailment-constant"

    def entailment_probability(self, premise: str, hypothesis: str) -> float:
        self.calls += 1
        return self.value


@dataclass
class TableEntailmentBackend:
    """Looks up (premise, hypothesis) in a fixed table; missing pairs get
    ``default``."""

    table: dict[tuple[str, str], float] = field(default_factory=dict)
    default: float = 0.0
    calls: int = 0
    fingerprint: str = "mock-entailment-table"

    def entailment_probability(self, premise: str, hypothesis: str) -> float:
        self.calls += 1
        return self.table.get((premise, hypothesis), self.default)


@dataclass
class HashEmbeddingBackend:
    """Deterministic bag-of-hashed-words embedding; a pure text -> vector map."""

    dim: int = 64
    calls: int = 0

    @property
    def fingerprint(self) -> str:
        return f"mock-hash-embedding/dim={self.dim}"

    def embed(self, text: str) -> list[float]:
        self.calls += 1
        vec = [0.0] * self.dim
        for word in text.lower().split():
            digest = hashlib.sha256(word.encode("utf-8")).digest()
            index = int.from_bytes(digest[:4], "big") % self.dim
            sign = 1.0 if digest[4] % 2 == 0 else -1.0
            vec[index] += sign
        if all(v == 0.0 for v in vec):
            vec[0] = 1.0
        return vec


@dataclass
class TableEmbeddingBackend:
    """Fixed text -> vector table for hand-constructed cosine cases."""

    table: dict[str, tuple[float, ...]] = field(default_factory=dict)
    calls: int = 0
    fingerprint: str = "mock-embedding-table"

    def embed(self, text: str) -> tuple[float, ...]:
        self.calls += 1
        return self.table[text]


@dataclass
class MockSummarizer:
    """Echoes the head of its input: the first min(min_length_tokens, input
    length) whitespace tokens. Makes extractor quality directly measurable,
    because the pipeline output is the (truncated) compressed document."""

    calls: int = 0
    name: str = "mock"
    fingerprint: str = "mock-summarizer/head-echo/whitespace"

    def count_tokens(self, text: str) -> int:
        return len(text.split())

    def generate(self, input_text: str, config) -> str:
        self.calls += 1
        tokens = input_text.split()
        keep = min(config.min_length_tokens, len(tokens))
        return " ".join(tokens[:keep])
