"""Planted-salience synthetic corpus.

Each document interleaves two lexical registers with disjoint vocabularies:
content sentences (a few of which are "planted" as genuinely salient) and
boilerplate sentences. Summaries are near-copies of the planted sentences,
so n-gram grounding must rank the planted sentences first, salience labels
split cleanly along the register boundary, and a lexical classifier can
recover the content half of each document.

Two fixed anchor words appear in every content sentence and every summary
sentence, guaranteeing that content-register sentences always outscore
boilerplate under smoothed sentence BLEU.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import DocumentPair, Sentence

CONTENT_WORDS = (
    "glacier", "sediment", "core", "isotope", "drill", "basin", "ridge",
    "moraine", "sample", "depth", "layer", "climate", "record", "signal",
    "gradient", "terrain", "bedrock", "crevasse", "meltwater", "outcrop",
    "stratum", "borehole", "carbon", "pollen", "varve", "tephra", "albedo",
    "firn", "ablation", "accumulation", "transect", "radar", "sonde",
    "plateau", "fjord", "delta", "esker", "drumlin", "till", "erratic",
)

BOILERPLATE_WORDS = (
    "agenda", "schedule", "attendance", "minutes", "approval", "budget",
    "invoice", "catering", "parking", "signature", "form", "deadline",
    "reminder", "office", "printer", "policy", "handbook", "training",
    "compliance", "memo", "meeting", "quorum", "ballot", "stationery",
    "timesheet", "payroll", "voucher", "receipt", "folder", "binder",
    "courier", "envelope", "postage", "lobby", "badge", "kiosk",
    "elevator", "custodian", "bulletin", "roster",
)

# Present in every content and summary sentence, never first or last word,
# so casing and trailing punctuation cannot break the token match.
ANCHOR_WORDS = ("survey", "basin")


@dataclass(frozen=True)
class SyntheticCorpus:
    pairs: tuple[DocumentPair, ...]
    planted: dict[str, frozenset[int]]


def _render(words: Sequence[str]) -> str:
    words = list(words)
    words[0] = words[0].capitalize()
    return " ".join(words) + "."


def _body(rng: random.Random, vocab: Sequence[str], length: int,
          anchored: bool) -> list[str]:
    words = [rng.choice(vocab) for _ in range(length)]
    if anchored:
        words[1], words[2] = ANCHOR_WORDS
    return words


def _near_copy(rng: random.Random, body: Sequence[str]) -> list[str]:
    """Drop one interior word and substitute another, leaving the first
    three and the final word untouched."""
    words = list(body)
    interior = list(range(3, len(words) - 1))
    drop, swap = rng.sample(interior, 2)
    words[swap] = rng.choice(CONTENT_WORDS)
    del words[drop]
    return words


def generate_corpus(num_docs: int = 30, sentences_per_doc: int = 40,
                    planted_per_doc: int = 4, seed: int = 0) -> SyntheticCorpus:
    if sentences_per_doc < 2 * planted_per_doc + 2:
        raise ValueError("documents too short to hold both registers")
    rng = random.Random(seed)
    pairs = []
    planted_map: dict[str, frozenset[int]] = {}
    for index in range(num_docs):
        doc_id = f"doc-{index:03d}"
        content_positions = set(rng.sample(range(sentences_per_doc),
                                           sentences_per_doc // 2))
        planted_positions = rng.sample(sorted(content_positions), planted_per_doc)
        planted_bodies: dict[int, list[str]] = {
            pos: _body(rng, CONTENT_WORDS, rng.randint(9, 12), anchored=True)
            for pos in planted_positions
        }
        source = []
        for pos in range(sentences_per_doc):
            if pos in planted_bodies:
                body = planted_bodies[pos]
            elif pos in content_positions:
                body = _body(rng, CONTENT_WORDS, rng.randint(8, 12), anchored=True)
            else:
                body = _body(rng, BOILERPLATE_WORDS, rng.randint(8, 12), anchored=False)
            source.append(Sentence.from_text(pos, _render(body)))
        summary = [
            Sentence.from_text(j, _render(_near_copy(rng, planted_bodies[pos])))
            for j, pos in enumerate(sorted(planted_positions))
        ]
        pairs.append(DocumentPair(doc_id=doc_id, source=tuple(source),
                                  summary=tuple(summary)))
        planted_map[doc_id] = frozenset(sorted(planted_positions))
    return SyntheticCorpus(pairs=tuple(pairs), planted=planted_map)


def write_raw_jsonl(corpus: SyntheticCorpus | Sequence[DocumentPair],
                    path: str | Path) -> None:
    """Flatten to the raw ingest format: one {doc_id, split, source_text,
    summary_text} object per line, sentences joined with single spaces."""
    pairs = corpus.pairs if isinstance(corpus, SyntheticCorpus) else corpus
    with open(path, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(json.dumps({
                "doc_id": pair.doc_id,
                "split": pair.split,
                "source_text": " ".join(s.text for s in pair.source),
                "summary_text": " ".join(s.text for s in pair.summary),
            }, sort_keys=True, ensure_ascii=False) + "\n")
