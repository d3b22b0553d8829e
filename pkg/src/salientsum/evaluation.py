"""Evaluation: ROUGE metrics, baseline extractors, agreement recall, and
perplexity-distribution analysis over labeled premise/hypothesis pairs.

All metrics share one tokenizer (lowercase, alphanumeric runs) so scores
are comparable across systems without toolkit ambiguity. ROUGE-L uses the
longest common subsequence of the full word sequences.
"""

from __future__ import annotations

import json
import math
import random
import re
import statistics
import warnings
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .classifier import CompressedDocument
from .corpus import DocumentPair, Sentence
from .grounding import TokenLikelihoodBackend, conditional_perplexity

TEXTRANK_DAMPING = 0.85
TEXTRANK_TOLERANCE = 1e-6
TEXTRANK_MAX_ITERATIONS = 100

NLI_CLASSES = ("entailment", "neutral", "contradiction")


def tokenize(text: str) -> list[str]:
    """Lowercased alphanumeric word tokens; punctuation splits, never counts."""
    return re.findall(r"[a-z0-9]+", text.lower())


@dataclass(frozen=True)
class RougeScore:
    recall: float
    precision: float
    f1: float


def _f1(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def rouge_n(hypothesis: str, reference: str, n: int = 1) -> RougeScore:
    """N-gram overlap with clipped counts (each reference n-gram is matched
    at most as often as it occurs)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    ref_counts = _ngrams(tokenize(reference), n)
    if not ref_counts:
        raise ValueError("reference has no n-grams")
    hyp_counts = _ngrams(tokenize(hypothesis), n)
    overlap = sum(min(count, ref_counts[gram]) for gram, count in hyp_counts.items())
    recall = overlap / sum(ref_counts.values())
    precision = overlap / sum(hyp_counts.values()) if hyp_counts else 0.0
    return RougeScore(recall=recall, precision=precision, f1=_f1(precision, recall))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    # O(len(a) * len(b)) time, O(len(b)) space
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token in a:
        current = [0]
        for j, other in enumerate(b, start=1):
            if token == other:
                current.append(previous[j - 1] + 1)
            else:
                current.append(max(previous[j], current[j - 1]))
        previous = current
    return previous[-1]


def rouge_l(hypothesis: str, reference: str) -> RougeScore:
    """Longest-common-subsequence overlap over the full word sequences."""
    ref_tokens = tokenize(reference)
    if not ref_tokens:
        raise ValueError("empty reference")
    hyp_tokens = tokenize(hypothesis)
    lcs = _lcs_length(hyp_tokens, ref_tokens)
    recall = lcs / len(ref_tokens)
    precision = lcs / len(hyp_tokens) if hyp_tokens else 0.0
    return RougeScore(recall=recall, precision=precision, f1=_f1(precision, recall))


def recall_vs_gold(source_variant: str, gold_summary: str) -> tuple[float, float]:
    """How much of the gold summary's content a source variant covers:
    unigram and bigram recall with the gold summary as the reference, so a
    superset variant (the whole document) is the upper bound."""
    if not source_variant.strip() or not gold_summary.strip():
        raise ValueError("empty input")
    r1 = rouge_n(source_variant, gold_summary, n=1).recall
    r2 = rouge_n(source_variant, gold_summary, n=2).recall
    return r1, r2


# --- baseline extractors -----------------------------------------------------


def _assemble(document: Sequence[Sentence], kept_ids: Sequence[int],
              doc_id: str) -> CompressedDocument:
    ids = tuple(sorted(kept_ids))
    by_id = {s.sent_id: s for s in document}
    kept = tuple(by_id[i] for i in ids)
    return CompressedDocument(doc_id=doc_id, kept=kept, kept_ids=ids,
                              text=" ".join(s.text for s in kept))


def random_extractor(document: Sequence[Sentence], count: int,
                     seed: int = 0, doc_id: str = "") -> CompressedDocument:
    """Uniform sample of ``count`` sentences without replacement, assembled
    in document order. Asking for more than the document has keeps it all."""
    if not document:
        raise ValueError("empty document")
    if count < 1:
        raise ValueError("count must be >= 1")
    count = min(count, len(document))
    rng = random.Random(seed)
    kept_ids = rng.sample([s.sent_id for s in document], count)
    return _assemble(document, kept_ids, doc_id)


def _textrank_matrix(document: Sequence[Sentence]) -> np.ndarray:
    """Symmetric similarity matrix: shared distinct words over the sum of
    log sentence lengths; zero whenever either sentence has <= 1 word."""
    token_lists = [tokenize(s.text) for s in document]
    token_sets = [set(tokens) for tokens in token_lists]
    m = len(document)
    weights = np.zeros((m, m))
    for a in range(m):
        if len(token_lists[a]) <= 1:
            continue
        for b in range(a + 1, m):
            if len(token_lists[b]) <= 1:
                continue
            shared = len(token_sets[a] & token_sets[b])
            if shared:
                w = shared / (math.log(len(token_lists[a])) + math.log(len(token_lists[b])))
                weights[a, b] = weights[b, a] = w
    return weights


def textrank_scores(document: Sequence[Sentence]) -> np.ndarray:
    """Stationary sentence importance via damped power iteration.

    Rows with no outgoing weight distribute their mass uniformly, keeping
    the score vector a probability distribution at every step.
    """
    m = len(document)
    if m == 0:
        raise ValueError("empty document")
    weights = _textrank_matrix(document)
    row_sums = weights.sum(axis=1)
    dangling = row_sums == 0
    transition = np.zeros((m, m))
    nonzero = ~dangling
    transition[nonzero] = weights[nonzero] / row_sums[nonzero, None]
    scores = np.full(m, 1.0 / m)
    for _ in range(TEXTRANK_MAX_ITERATIONS):
        dangling_mass = scores[dangling].sum()
        updated = (1.0 - TEXTRANK_DAMPING) / m + TEXTRANK_DAMPING * (
            transition.T @ scores + dangling_mass / m
        )
        if np.abs(updated - scores).sum() < TEXTRANK_TOLERANCE:
            scores = updated
            break
        scores = updated
    return scores


def textrank_extractor(document: Sequence[Sentence], count: int,
                       doc_id: str = "") -> CompressedDocument:
    """Top ``count`` sentences by graph centrality, document order restored.
    Ties go to the earlier sentence."""
    if not document:
        raise ValueError("empty document")
    if count < 1:
        raise ValueError("count must be >= 1")
    count = min(count, len(document))
    scores = textrank_scores(document)
    ranked = sorted(range(len(document)), key=lambda i: (-scores[i], document[i].sent_id))
    kept_ids = [document[i].sent_id for i in ranked[:count]]
    return _assemble(document, kept_ids, doc_id)


def human_agreement_recall(predicted_salient_ids: set[int],
                           human_marked_ids: set[int]) -> float:
    """Fraction of human-marked sentences the system also selected."""
    if not human_marked_ids:
        raise ValueError("empty human-marked set")
    return len(predicted_salient_ids & human_marked_ids) / len(human_marked_ids)


# --- perplexity-distribution analysis ----------------------------------------


@dataclass
class NliPerplexityStats:
    """Per-class conditional perplexities of hypothesis given premise."""

    perplexities: dict[str, list[float]]
    medians: dict[str, float]
    quartiles: dict[str, tuple[float, float]]
    bin_edges: list[float]
    histograms: dict[str, list[int]]
    failures: dict[str, int] = field(default_factory=dict)


def nli_perplexity_analysis(
    labeled_pairs: Sequence[tuple[str, str, str]],
    backend: TokenLikelihoodBackend,
    sample_per_class: int,
    seed: int = 0,
    num_bins: int = 20,
) -> NliPerplexityStats:
    """Sample pairs per class, score each hypothesis conditioned on its
    premise, and summarize the per-class perplexity distributions with
    shared fixed-width histogram bins."""
    if sample_per_class < 1:
        raise ValueError("sample_per_class must be >= 1")
    rng = random.Random(seed)
    per_class: dict[str, list[float]] = {}
    failures: dict[str, int] = {}
    for cls in NLI_CLASSES:
        pool = [(p, h) for p, h, c in labeled_pairs if c == cls]
        if len(pool) < sample_per_class:
            warnings.warn(f"class {cls!r} has only {len(pool)} pairs; using all")
            sample = pool
        else:
            sample = rng.sample(pool, sample_per_class)
        values, failed = [], 0
        for premise, hypothesis in sample:
            try:
                values.append(conditional_perplexity(backend, premise, hypothesis))
            except (ValueError, ArithmeticError):
                failed += 1
        per_class[cls] = values
        failures[cls] = failed
    pooled = [v for values in per_class.values() for v in values]
    if not pooled:
        raise ValueError("no perplexities computed for any class")
    low, high = min(pooled), max(pooled)
    if high == low:
        high = low + 1.0
    edges = np.linspace(low, high, num_bins + 1)
    histograms = {
        cls: np.histogram(values, bins=edges)[0].tolist() if values else [0] * num_bins
        for cls, values in per_class.items()
    }
    medians, quartiles = {}, {}
    for cls, values in per_class.items():
        if values:
            medians[cls] = statistics.median(values)
            q = np.percentile(values, [25, 75])
            quartiles[cls] = (float(q[0]), float(q[1]))
    return NliPerplexityStats(
        perplexities=per_class,
        medians=medians,
        quartiles=quartiles,
        bin_edges=edges.tolist(),
        histograms=histograms,
        failures=failures,
    )


def write_histogram_csv(stats: NliPerplexityStats, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("class,bin_low,bin_high,count\n")
        for cls in NLI_CLASSES:
            counts = stats.histograms.get(cls, [])
            for i, count in enumerate(counts):
                fh.write(f"{cls},{stats.bin_edges[i]:.6f},"
                         f"{stats.bin_edges[i + 1]:.6f},{count}\n")


def plot_histogram(stats: NliPerplexityStats, path: str | Path) -> None:
    """Optional distribution plot; requires matplotlib."""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError as exc:
        raise RuntimeError("matplotlib is required for plots; the CSV written "
                           "by write_histogram_csv carries the same data") from exc
    fig, ax = plt.subplots(figsize=(8, 5))
    centers = [(stats.bin_edges[i] + stats.bin_edges[i + 1]) / 2
               for i in range(len(stats.bin_edges) - 1)]
    for cls in NLI_CLASSES:
        if cls in stats.histograms:
            ax.plot(centers, stats.histograms[cls], marker="o", label=cls)
    ax.set_xlabel("conditional perplexity")
    ax.set_ylabel("pair count")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


# --- report assembly ----------------------------------------------------------


_METRICS = ("rouge1", "rouge2", "rougeL")


@dataclass
class EvalReport:
    per_system: dict[str, dict[str, RougeScore]]
    per_document: dict[str, dict[str, dict[str, RougeScore]]]
    compression_mean_ratio: float | None = None

    def to_json(self) -> dict:
        payload: dict = {}
        for system, metrics in self.per_system.items():
            payload[system] = {
                name: {"recall": score.recall, "precision": score.precision,
                       "f1": score.f1}
                for name, score in metrics.items()
            }
        payload["compression"] = {"mean_ratio": self.compression_mean_ratio}
        return payload

    def render_table(self) -> str:
        header = (f"{'system':<24}"
                  f"{'R1-R':>8}{'R1-P':>8}{'R1-F':>8}"
                  f"{'R2-R':>8}{'R2-P':>8}{'R2-F':>8}"
                  f"{'RL-R':>8}{'RL-P':>8}{'RL-F':>8}")
        lines = [header, "-" * len(header)]
        for system in sorted(self.per_system):
            metrics = self.per_system[system]
            cells = "".join(
                f"{getattr(metrics[m], part):>8.4f}"
                for m in _METRICS for part in ("recall", "precision", "f1")
            )
            lines.append(f"{system:<24}{cells}")
        if self.compression_mean_ratio is not None:
            lines.append(f"mean compression ratio: {self.compression_mean_ratio:.4f}")
        return "\n".join(lines)


def _score_all(hypothesis: str, reference: str) -> dict[str, RougeScore]:
    return {
        "rouge1": rouge_n(hypothesis, reference, n=1),
        "rouge2": rouge_n(hypothesis, reference, n=2),
        "rougeL": rouge_l(hypothesis, reference),
    }


def build_report(
    corpus_test: Sequence[DocumentPair],
    systems: Mapping[str, Mapping[str, str]],
    gold: Mapping[str, str] | None = None,
    compression_ratios: Mapping[str, float] | None = None,
) -> EvalReport:
    """Score every system's summaries against the gold references and
    average per-document scores component-wise.

    ``systems`` maps system name to {doc_id: summary text}; ``gold``
    overrides the references carried by the corpus when given.
    """
    if not corpus_test:
        raise ValueError("empty test corpus")
    references = {
        pair.doc_id: (gold[pair.doc_id] if gold is not None
                      else " ".join(s.text for s in pair.summary))
        for pair in corpus_test
    }
    doc_ids = [pair.doc_id for pair in corpus_test]
    per_system: dict[str, dict[str, RougeScore]] = {}
    per_document: dict[str, dict[str, dict[str, RougeScore]]] = {}
    for system, summaries in systems.items():
        missing = [d for d in doc_ids if d not in summaries]
        if missing:
            raise ValueError(f"system {system!r} is missing summaries for "
                             f"documents: {', '.join(missing)}")
        doc_scores = {
            doc_id: _score_all(summaries[doc_id], references[doc_id])
            for doc_id in doc_ids
        }
        per_document[system] = doc_scores
        per_system[system] = {
            metric: RougeScore(
                recall=statistics.fmean(s[metric].recall for s in doc_scores.values()),
                precision=statistics.fmean(s[metric].precision for s in doc_scores.values()),
                f1=statistics.fmean(s[metric].f1 for s in doc_scores.values()),
            )
            for metric in _METRICS
        }
    mean_ratio = None
    if compression_ratios:
        mean_ratio = statistics.fmean(compression_ratios.values())
    return EvalReport(per_system=per_system, per_document=per_document,
                      compression_mean_ratio=mean_ratio)


def write_report(report: EvalReport, json_path: str | Path,
                 table_path: str | Path | None = None) -> None:
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_json(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    if table_path is not None:
        with open(table_path, "w", encoding="utf-8") as fh:
            fh.write(report.render_table() + "\n")
