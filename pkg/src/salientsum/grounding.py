"""Grounding scores f(s, t) between source and summary sentences.

Four interchangeable methods: conditional language-model perplexity,
entailment probability, embedding cosine similarity, and sentence BLEU.
Model-backed methods talk to pluggable backends so tests run against
deterministic mocks.
"""

from __future__ import annotations

import json
import math
import threading
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, Sequence, runtime_checkable

from .corpus import DEFAULT_MIN_WORDS, DocumentPair, Sentence, filter_short

METHODS = ("perplexity", "entailment", "similarity", "bleu")

BLEU_MAX_ORDER = 4
BLEU_EPSILON = 0.1

# Fingerprint for the backend-free BLEU method: tokenization + smoothing rule.
BLEU_FINGERPRINT = f"bleu/whitespace/eps={BLEU_EPSILON}/max_order={BLEU_MAX_ORDER}"


@runtime_checkable
class TokenLikelihoodBackend(Protocol):
    """Conditional token log-probabilities under the backend's own tokenizer."""

    max_context_tokens: int
    fingerprint: str

    def token_logprobs(self, context: str, target: str) -> list[float]:
        """Log-probabilities of target's tokens given the context and the
        preceding target tokens. Length >= 1 for a non-empty target."""
        ...

    def count_tokens(self, text: str) -> int:
        ...


@runtime_checkable
class EmbeddingBackend(Protocol):
    """Text to a fixed-dimension real vector."""

    fingerprint: str

    def embed(self, text: str) -> Sequence[float]:
        ...


@runtime_checkable
class EntailmentBackend(Protocol):
    """(premise, hypothesis) to an entailment probability in [0, 1]."""

    fingerprint: str

    def entailment_probability(self, premise: str, hypothesis: str) -> float:
        ...


@dataclass
class ScoringBackends:
    """Backends available to :func:`score_matrix`; supply what the method needs."""

    likelihood: TokenLikelihoodBackend | None = None
    embedding: EmbeddingBackend | None = None
    entailment: EntailmentBackend | None = None


@dataclass(frozen=True)
class GroundingScoreMatrix:
    """f(s_i, t_j) for one document pair under one scoring method.

    Rows are source sentences, columns summary sentences. Sentences pruned
    by the short-sentence filter are listed in ``skipped_source`` /
    ``skipped_summary``; their entries hold a finite sentinel strictly below
    every scored value and take no part in any selection.
    """

    doc_id: str
    method: str
    scores: tuple[tuple[float, ...], ...]
    skipped_source: frozenset[int]
    skipped_summary: frozenset[int]

    @property
    def m(self) -> int:
        return len(self.scores)

    @property
    def n(self) -> int:
        return len(self.scores[0]) if self.scores else 0

    def scored_source_ids(self) -> list[int]:
        return [i for i in range(self.m) if i not in self.skipped_source]

    def scored_summary_ids(self) -> list[int]:
        return [j for j in range(self.n) if j not in self.skipped_summary]


def _text(sentence: Sentence | str) -> str:
    return sentence.text if isinstance(sentence, Sentence) else sentence


def _truncate_context_head(backend: TokenLikelihoodBackend, context: str, target: str) -> str:
    """Drop words from the head of the context until [s; t] fits; the tail
    nearest the target is the most useful conditioning."""
    words = context.split()
    while words and backend.count_tokens(" ".join(words) + " " + target) > backend.max_context_tokens:
        words = words[1:]
    return " ".join(words)


def conditional_perplexity(backend: TokenLikelihoodBackend,
                           s: Sentence | str, t: Sentence | str) -> float:
    """Perplexity of t's tokens conditioned on s, via [s; t] concatenation.

    Returns exp(-(1/|t|) * sum of target-token log-probabilities), with |t|
    counted under the backend tokenizer.
    """
    context, target = _text(s), _text(t)
    if not target.strip():
        raise ValueError("empty target")
    context = _truncate_context_head(backend, context, target)
    logprobs = backend.token_logprobs(context, target)
    if not logprobs:
        raise ValueError("empty target")
    if any(not math.isfinite(lp) for lp in logprobs):
        raise ValueError("backend returned non-finite log-probability")
    return math.exp(-sum(logprobs) / len(logprobs))


def f_perplexity(ppl: float) -> float:
    """Map perplexity to a grounding score; lower perplexity, higher score."""
    if ppl <= 0:
        raise ValueError("perplexity must be positive")
    return -math.log(ppl)


def _ngram_counts(tokens: Sequence[str], order: int) -> Counter:
    return Counter(tuple(tokens[i:i + order]) for i in range(len(tokens) - order + 1))


def f_bleu(s: Sentence | str, t: Sentence | str) -> float:
    """Sentence BLEU of hypothesis t against reference s.

    Modified n-gram precisions up to order 4, uniform weights, brevity
    penalty, and epsilon smoothing: 0.1 replaces each zero match numerator
    (denominators floored at 1 so short hypotheses stay well defined).
    """
    ref = _text(s).split()
    hyp = _text(t).split()
    if not ref or not hyp:
        raise ValueError("empty sentence")
    log_sum = 0.0
    for order in range(1, BLEU_MAX_ORDER + 1):
        hyp_counts = _ngram_counts(hyp, order)
        ref_counts = _ngram_counts(ref, order)
        matches = sum(min(count, ref_counts[gram]) for gram, count in hyp_counts.items())
        total = max(1, sum(hyp_counts.values()))
        numerator = matches if matches > 0 else BLEU_EPSILON
        log_sum += math.log(numerator / total)
    if len(hyp) > len(ref):
        brevity = 1.0
    else:
        brevity = math.exp(1.0 - len(ref) / len(hyp))
    return brevity * math.exp(log_sum / BLEU_MAX_ORDER)


def f_similarity(backend: EmbeddingBackend, s: Sentence | str, t: Sentence | str) -> float:
    """Cosine similarity of the two sentence embeddings."""
    u = [float(x) for x in backend.embed(_text(s))]
    v = [float(x) for x in backend.embed(_text(t))]
    norm_u = math.sqrt(sum(x * x for x in u))
    norm_v = math.sqrt(sum(x * x for x in v))
    if norm_u == 0.0 or norm_v == 0.0:
        raise ValueError("degenerate embedding")
    return sum(a * b for a, b in zip(u, v)) / (norm_u * norm_v)


def f_entailment(backend: EntailmentBackend, s: Sentence | str, t: Sentence | str) -> float:
    """Entailment probability of hypothesis t given premise s."""
    prob = float(backend.entailment_probability(_text(s), _text(t)))
    if not 0.0 <= prob <= 1.0:
        raise ValueError(f"entailment probability {prob} outside [0, 1]")
    return prob


class ScoreCache:
    """JSONL-backed cache of f(s_i, t_j) values.

    One object per line: {doc_id, method, backend_fingerprint, i, j, value}.
    Writes are serialized; reads come from an in-memory index.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._lock = threading.Lock()
        self._values: dict[tuple[str, str, str, int, int], float] = {}
        if self.path.exists():
            self._load()

    def _load(self) -> None:
        with open(self.path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    key = (rec["doc_id"], rec["method"], rec["backend_fingerprint"],
                           int(rec["i"]), int(rec["j"]))
                    self._values[key] = float(rec["value"])
                except (ValueError, KeyError, TypeError) as exc:
                    raise ValueError(f"corrupt score cache at {self.path}:{line_no}") from exc

    def get(self, doc_id: str, method: str, fingerprint: str, i: int, j: int) -> float | None:
        return self._values.get((doc_id, method, fingerprint, i, j))

    def put(self, doc_id: str, method: str, fingerprint: str, i: int, j: int, value: float) -> None:
        key = (doc_id, method, fingerprint, i, j)
        with self._lock:
            if key in self._values:
                return
            self._values[key] = value
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with open(self.path, "a", encoding="utf-8") as fh:
                fh.write(json.dumps({
                    "doc_id": doc_id, "method": method, "backend_fingerprint": fingerprint,
                    "i": i, "j": j, "value": value,
                }, sort_keys=True) + "\n")


def method_fingerprint(method: str, backends: ScoringBackends) -> str:
    if method == "bleu":
        return BLEU_FINGERPRINT
    backend = {
        "perplexity": backends.likelihood,
        "similarity": backends.embedding,
        "entailment": backends.entailment,
    }.get(method)
    if backend is None:
        raise ValueError(f"method {method!r} requires a backend that was not supplied")
    return backend.fingerprint


def _score_pair(method: str, backends: ScoringBackends,
                s: Sentence, t: Sentence) -> float:
    if method == "perplexity":
        return f_perplexity(conditional_perplexity(backends.likelihood, s, t))
    if method == "bleu":
        return f_bleu(s, t)
    if method == "similarity":
        return f_similarity(backends.embedding, s, t)
    if method == "entailment":
        return f_entailment(backends.entailment, s, t)
    raise ValueError(f"unknown grounding method {method!r}")


def score_matrix(pair: DocumentPair, method: str,
                 backends: ScoringBackends | None = None,
                 cache: ScoreCache | None = None,
                 min_words: int = DEFAULT_MIN_WORDS) -> GroundingScoreMatrix:
    """Compute f for every (source, summary) sentence pair surviving the
    short-sentence filter.

    Pruned rows and columns are recorded as skipped and filled with a finite
    sentinel one below the smallest scored value, so even a naive sort ranks
    them strictly last. Results are cached per (doc_id, method, backend
    fingerprint) when a cache is supplied.
    """
    if method not in METHODS:
        raise ValueError(f"unknown grounding method {method!r}")
    backends = backends or ScoringBackends()
    fingerprint = method_fingerprint(method, backends)

    kept_source = {s.sent_id for s in filter_short(pair.source, min_words)}
    kept_summary = {t.sent_id for t in filter_short(pair.summary, min_words)}
    m, n = len(pair.source), len(pair.summary)

    values: dict[tuple[int, int], float] = {}
    for s in pair.source:
        if s.sent_id not in kept_source:
            continue
        for t in pair.summary:
            if t.sent_id not in kept_summary:
                continue
            cached = cache.get(pair.doc_id, method, fingerprint, s.sent_id, t.sent_id) if cache else None
            if cached is not None:
                values[(s.sent_id, t.sent_id)] = cached
                continue
            value = float(_score_pair(method, backends, s, t))
            if not math.isfinite(value):
                raise ValueError(f"non-finite grounding score for {pair.doc_id} ({s.sent_id},{t.sent_id})")
            values[(s.sent_id, t.sent_id)] = value
            if cache is not None:
                cache.put(pair.doc_id, method, fingerprint, s.sent_id, t.sent_id, value)

    sentinel = min(values.values()) - 1.0 if values else 0.0
    scores = tuple(
        tuple(values.get((i, j), sentinel) for j in range(n))
        for i in range(m)
    )
    return GroundingScoreMatrix(
        doc_id=pair.doc_id,
        method=method,
        scores=scores,
        skipped_source=frozenset(i for i in range(m) if i not in kept_source),
        skipped_summary=frozenset(j for j in range(n) if j not in kept_summary),
    )
