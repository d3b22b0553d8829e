"""Abstractive summarization over compressed documents.

The summarizer itself is pluggable. The package ships a mock backend
(:class:`salientsum.backends.MockSummarizer`) used throughout the tests;
a pretrained seq2seq backend lives in :mod:`salientsum.integration`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence, runtime_checkable


@dataclass(frozen=True)
class GenerationConfig:
    beam_size: int = 4
    length_penalty: float = 2.0
    min_length_tokens: int = 500
    no_repeat_ngram: int = 3
    max_input_tokens: int = 1024

    def __post_init__(self):
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if self.min_length_tokens < 1:
            raise ValueError("min_length_tokens must be >= 1")
        if self.max_input_tokens < 1:
            raise ValueError("max_input_tokens must be >= 1")


@runtime_checkable
class SummarizerBackend(Protocol):
    name: str

    def count_tokens(self, text: str) -> int:
        ...

    def generate(self, text: str, config: GenerationConfig) -> str:
        ...


@dataclass(frozen=True)
class SummaryResult:
    doc_id: str
    system: str
    summary_text: str
    input_tokens: int
    output_tokens: int


def truncate_input(text: str, tokenizer, max_input_tokens: int) -> str:
    """Longest whitespace-word prefix of ``text`` that fits the tokenizer's
    budget; never splits mid-word. ``tokenizer`` is anything exposing
    ``count_tokens(text)``. Binary search keeps this cheap for real
    subword tokenizers."""
    if max_input_tokens < 1:
        raise ValueError("max_input_tokens must be >= 1")
    if tokenizer.count_tokens(text) <= max_input_tokens:
        return text
    words = text.split()
    lo, hi = 1, len(words)  # always keep at least one word
    while lo < hi:
        mid = (lo + hi + 1) // 2
        if tokenizer.count_tokens(" ".join(words[:mid])) <= max_input_tokens:
            lo = mid
        else:
            hi = mid - 1
    return " ".join(words[:lo])


def summarize(backend: SummarizerBackend, compressed,
              config: GenerationConfig | None = None,
              doc_id: str = "", system: str = "extract+abstract") -> SummaryResult:
    """Truncate the compressed document to the input budget, run the
    backend, and report the result with input/output token counts.

    ``compressed`` is a compressed-document object (anything with ``text``
    and ``doc_id`` attributes) or a plain string.
    """
    if config is None:
        config = GenerationConfig()
    text = getattr(compressed, "text", compressed)
    if not doc_id:
        doc_id = getattr(compressed, "doc_id", "")
    if not text.strip():
        raise ValueError("empty input text")
    truncated = truncate_input(text, backend, config.max_input_tokens)
    summary = backend.generate(truncated, config)
    return SummaryResult(
        doc_id=doc_id,
        system=system,
        summary_text=summary,
        input_tokens=backend.count_tokens(truncated),
        output_tokens=backend.count_tokens(summary),
    )


def write_summaries(results: Sequence[SummaryResult], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for r in results:
            fh.write(json.dumps({
                "doc_id": r.doc_id,
                "system": r.system,
                "summary_text": r.summary_text,
                "input_tokens": r.input_tokens,
                "output_tokens": r.output_tokens,
            }, sort_keys=True, ensure_ascii=False) + "\n")


def read_summaries(path: str | Path) -> list[SummaryResult]:
    results = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            results.append(SummaryResult(
                doc_id=rec["doc_id"],
                system=rec["system"],
                summary_text=rec["summary_text"],
                input_tokens=rec["input_tokens"],
                output_tokens=rec["output_tokens"],
            ))
    return results


def export_finetuning(pairs: Sequence[tuple[str, str]],
                      source_path: str | Path, target_path: str | Path) -> int:
    """Write line-aligned source/target files for seq2seq fine-tuning.

    Each pair is (compressed document text, gold summary text); embedded
    newlines are collapsed so line i of both files describes document i.
    """
    with open(source_path, "w", encoding="utf-8") as src, \
            open(target_path, "w", encoding="utf-8") as tgt:
        for source_text, target_text in pairs:
            src.write(" ".join(source_text.split()) + "\n")
            tgt.write(" ".join(target_text.split()) + "\n")
    return len(pairs)
