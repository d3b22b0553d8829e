"""Corpus ingestion: sentence segmentation, cleaning, filtering, statistics.

Documents arrive as raw (source_text, summary_text) pairs and leave as
ordered lists of cleaned :class:`Sentence` objects. All functions here are
pure; nothing mutates its inputs.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

# Characters allowed to survive cleaning: letters, digits, a fixed set of
# ASCII punctuation, and whitespace. Fixed charset keeps preprocessing
# reproducible across environments.
_DISALLOWED = re.compile(r"""[^A-Za-z0-9.,;:!?'"()\-/%$&\s]""")
_WHITESPACE = re.compile(r"\s+")

# Tokens that end with a period but do not end a sentence.
ABBREVIATIONS = frozenset({
    "dr.", "mr.", "mrs.", "ms.", "prof.", "st.", "jr.", "sr.", "rev.",
    "hon.", "gen.", "rep.", "sen.", "gov.", "capt.", "col.", "sgt.", "lt.",
    "u.s.", "u.k.", "u.n.", "e.g.", "i.e.", "etc.", "vs.", "v.", "no.",
    "nos.", "art.", "sec.", "fig.", "vol.", "ch.", "pp.", "p.", "cf.",
    "al.", "inc.", "corp.", "co.", "ltd.", "dept.", "approx.", "jan.",
    "feb.", "mar.", "apr.", "jun.", "jul.", "aug.", "sep.", "sept.",
    "oct.", "nov.", "dec.",
})

DEFAULT_MIN_WORDS = 5


@dataclass(frozen=True)
class Sentence:
    """One cleaned sentence with its 0-based position in the document."""

    sent_id: int
    text: str
    word_count: int

    @classmethod
    def from_text(cls, sent_id: int, text: str) -> "Sentence":
        return cls(sent_id=sent_id, text=text, word_count=len(text.split()))


@dataclass(frozen=True)
class DocumentPair:
    """A source document and its gold summary, both as sentence lists."""

    doc_id: str
    source: tuple[Sentence, ...]
    summary: tuple[Sentence, ...]
    split: str = "train"

    def __post_init__(self):
        for sentences in (self.source, self.summary):
            for pos, sent in enumerate(sentences):
                if sent.sent_id != pos:
                    raise ValueError(
                        f"{self.doc_id}: sent_id values must be consecutive from 0"
                    )

    @property
    def source_word_count(self) -> int:
        return sum(s.word_count for s in self.source)

    @property
    def summary_word_count(self) -> int:
        return sum(s.word_count for s in self.summary)


@dataclass(frozen=True)
class CorpusStats:
    pair_count: int
    avg_source_words: float
    avg_summary_words: float


def clean_sentence(text: str) -> str:
    """Drop characters outside the allowed charset, collapse whitespace, trim."""
    text = _DISALLOWED.sub("", text)
    text = _WHITESPACE.sub(" ", text)
    return text.strip()


def _is_abbreviation(text: str, punct_end: int) -> bool:
    # Word containing the period, e.g. "Dr." or "U.S." in "the U.S. has".
    start = punct_end
    while start > 0 and not text[start - 1].isspace():
        start -= 1
    return text[start:punct_end].lower() in ABBREVIATIONS


def _rule_segment(raw_text: str) -> list[str]:
    """Split on {., !, ?} followed by whitespace and an uppercase letter or
    end-of-text, with an abbreviation exception list for periods."""
    pieces: list[str] = []
    start = 0
    i = 0
    n = len(raw_text)
    while i < n:
        ch = raw_text[i]
        if ch in ".!?":
            # Absorb runs of terminal punctuation ("?!", "...").
            end = i + 1
            while end < n and raw_text[end] in ".!?":
                end += 1
            if ch == "." and end - i == 1 and _is_abbreviation(raw_text, end):
                i = end
                continue
            # Boundary only before whitespace + uppercase, or at end-of-text.
            j = end
            while j < n and raw_text[j].isspace():
                j += 1
            if j == n or (j > end and raw_text[j].isupper()):
                pieces.append(raw_text[start:end])
                start = j
                i = j
                continue
            i = end
            continue
        i += 1
    if start < n and raw_text[start:].strip():
        pieces.append(raw_text[start:])
    return pieces


Segmenter = Callable[[str], list[str]]


def split_sentences(raw_text: str, segmenter: Segmenter | None = None) -> list[Sentence]:
    """Segment raw text into cleaned sentences.

    The default segmenter is the deterministic rule-based splitter above;
    pass ``segmenter`` to plug in a higher-fidelity backend. Empty or
    whitespace-only input yields an empty list. Sentences that clean down
    to nothing are dropped; the survivors are renumbered from 0.
    """
    if not raw_text or not raw_text.strip():
        return []
    pieces = (segmenter or _rule_segment)(raw_text)
    sentences = []
    for piece in pieces:
        cleaned = clean_sentence(piece)
        if cleaned:
            sentences.append(Sentence.from_text(len(sentences), cleaned))
    return sentences


def filter_short(sentences: Sequence[Sentence], min_words: int = DEFAULT_MIN_WORDS) -> list[Sentence]:
    """Keep sentences with at least ``min_words`` whitespace words.

    This gates which sentences enter grounding-score computation; pruned
    sentences stay in the document itself.
    """
    if min_words < 1:
        raise ValueError("min_words must be >= 1")
    return [s for s in sentences if s.word_count >= min_words]


def corpus_stats(pairs: Sequence[DocumentPair]) -> CorpusStats:
    """Arithmetic means of per-document total word counts."""
    if not pairs:
        raise ValueError("empty corpus")
    return CorpusStats(
        pair_count=len(pairs),
        avg_source_words=sum(p.source_word_count for p in pairs) / len(pairs),
        avg_summary_words=sum(p.summary_word_count for p in pairs) / len(pairs),
    )


def make_pair(doc_id: str, source_text: str, summary_text: str, split: str = "train",
              segmenter: Segmenter | None = None) -> DocumentPair:
    """Segment and clean one raw (document, summary) pair."""
    return DocumentPair(
        doc_id=doc_id,
        source=tuple(split_sentences(source_text, segmenter)),
        summary=tuple(split_sentences(summary_text, segmenter)),
        split=split,
    )


# --- corpus file formats (JSON lines, UTF-8) -------------------------------
#
# raw ingest:     {doc_id, split, source_text, summary_text}
# preprocessed:   {doc_id, split, source_sentences: [...], summary_sentences: [...]}


def read_raw_corpus(path: str | Path) -> list[dict]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            for key in ("doc_id", "split", "source_text", "summary_text"):
                if key not in record:
                    raise ValueError(f"{path}:{line_no}: missing key {key!r}")
            records.append(record)
    return records


def preprocess_corpus(raw_records: Iterable[dict], segmenter: Segmenter | None = None) -> list[DocumentPair]:
    return [
        make_pair(r["doc_id"], r["source_text"], r["summary_text"], r["split"], segmenter)
        for r in raw_records
    ]


def write_preprocessed(pairs: Sequence[DocumentPair], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps({
                "doc_id": pair.doc_id,
                "split": pair.split,
                "source_sentences": [s.text for s in pair.source],
                "summary_sentences": [s.text for s in pair.summary],
            }, ensure_ascii=False, sort_keys=True) + "\n")


def read_preprocessed(path: str | Path) -> list[DocumentPair]:
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            pairs.append(DocumentPair(
                doc_id=record["doc_id"],
                source=tuple(Sentence.from_text(i, t)
                             for i, t in enumerate(record["source_sentences"])),
                summary=tuple(Sentence.from_text(i, t)
                              for i, t in enumerate(record["summary_sentences"])),
                split=record["split"],
            ))
    return pairs
